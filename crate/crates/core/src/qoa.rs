//! States supported on the rows of an orthogonal or packing array, and the
//! phase-flip witnesses they admit.
//!
//! If every `k`-column projection of the rows is distinct, two rows never
//! agree on the `k` traced parties of an `(N - k)`-body marginal, so that
//! marginal is diagonal with entries `|a_i|^2`. Changing the phases of the
//! `a_i` therefore leaves the complete `(N - k)`-deck untouched.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::{PI, TAU};

use crate::arrays::CombinatorialArray;
use crate::error::{Error, Result};
use crate::marginal::{state_deck_distance, MarginalFamily, DEFAULT_DECK_TOL};
use crate::state::{fidelity_up_to_phase, PartyStructure, PureState};

/// Amplitudes at or below this magnitude count as zero.
pub const DEFAULT_AMP_FLOOR: f64 = 1e-12;
const DISTINCT_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GeneralizedQoaState {
    array: CombinatorialArray,
    amplitudes: Vec<Complex64>,
    state: PureState,
}

impl GeneralizedQoaState {
    pub fn array(&self) -> &CombinatorialArray {
        &self.array
    }

    /// Normalized row amplitudes.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    fn row_indices(&self) -> Vec<usize> {
        let s = self.state.structure();
        self.array.rows().iter().map(|r| s.index(r)).collect()
    }
}

/// `sum_i a_i |row_i>`, normalized. Uniform amplitudes when none are given.
pub fn qoa_state(
    array: CombinatorialArray,
    amplitudes: Option<Vec<Complex64>>,
) -> Result<GeneralizedQoaState> {
    let r = array.num_rows();
    let amplitudes = amplitudes.unwrap_or_else(|| vec![Complex64::new(1.0, 0.0); r]);
    if amplitudes.len() != r {
        return Err(Error::LengthMismatch {
            expected: r,
            found: amplitudes.len(),
        });
    }
    if let Some(index) = amplitudes
        .iter()
        .position(|a| a.norm() <= DEFAULT_AMP_FLOOR)
    {
        return Err(Error::ZeroAmplitude {
            index,
            floor: DEFAULT_AMP_FLOOR,
        });
    }
    let mut seen = HashSet::new();
    if let Some(row) = array.rows().iter().find(|row| !seen.insert(*row)) {
        return Err(Error::InvalidArray(format!("repeated row {row:?}")));
    }
    let structure = PartyStructure::uniform(array.num_columns(), array.levels())?;
    let mut amps = vec![Complex64::new(0.0, 0.0); structure.total_dim()];
    for (row, &a) in array.rows().iter().zip(&amplitudes) {
        amps[structure.index(row)] = a;
    }
    let state = PureState::from_amplitudes(structure, amps, true)?;
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(GeneralizedQoaState {
        array,
        amplitudes: amplitudes.iter().map(|a| a / norm).collect(),
        state,
    })
}

/// Row phases for a witness.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessPhases {
    /// Negate the amplitude of one row (0-based).
    Flip(usize),
    /// One phase per row.
    Phases(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct QoaWitness {
    pub witness: PureState,
    /// Deck distance within tolerance and fidelity up to phase below `1 - 1e-6`.
    pub verified: bool,
    pub deck_distance: f64,
    pub fidelity: f64,
    /// Size of the marginals compared, `N - k`.
    pub marginal_size: usize,
}

pub fn non_udp_witness(g: &GeneralizedQoaState, phases: &WitnessPhases) -> Result<QoaWitness> {
    non_udp_witness_with(g, phases, false, DEFAULT_DECK_TOL)
}

/// Multiplies each row amplitude by `e^{i phi_i}` and checks the complete
/// `(N - k)`-deck. Strength above `floor(N/2)` is refused unless `allow_any_strength`.
pub fn non_udp_witness_with(
    g: &GeneralizedQoaState,
    phases: &WitnessPhases,
    allow_any_strength: bool,
    deck_tol: f64,
) -> Result<QoaWitness> {
    let n = g.array.num_columns();
    let k = g.array.strength();
    if k > n / 2 && !allow_any_strength {
        return Err(Error::StrengthOutOfScope { k, n, max: n / 2 });
    }
    let r = g.array.num_rows();
    let phases = match phases {
        WitnessPhases::Flip(i) if *i < r => {
            let mut p = vec![0.0; r];
            p[*i] = PI;
            p
        }
        WitnessPhases::Flip(i) => {
            return Err(Error::InvalidConfig(format!(
                "row {i} out of range for {r} rows"
            )));
        }
        WitnessPhases::Phases(p) if p.len() != r => {
            return Err(Error::LengthMismatch {
                expected: r,
                found: p.len(),
            })
        }
        WitnessPhases::Phases(p) => p.clone(),
    };
    let all_equal = phases.iter().all(|&p| {
        let d = (p - phases[0]).rem_euclid(TAU);
        d.min(TAU - d) < 1e-12
    });
    if all_equal {
        return Err(Error::AllPhasesEqual);
    }

    let mut amps = g.state.amplitudes().to_vec();
    for (idx, phi) in g.row_indices().into_iter().zip(&phases) {
        amps[idx] *= Complex64::from_polar(1.0, *phi);
    }
    let witness = PureState::from_amplitudes(g.state.structure().clone(), amps, true)?;
    let family = MarginalFamily::complete(n, n - k)?;
    let deck_distance = state_deck_distance(&g.state, &witness, &family)?;
    let fidelity = fidelity_up_to_phase(&g.state, &witness)?;
    Ok(QoaWitness {
        verified: deck_distance <= deck_tol && fidelity < 1.0 - DISTINCT_TOL,
        witness,
        deck_distance,
        fidelity,
        marginal_size: n - k,
    })
}

/// Serializable summary of a witness for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub verified: bool,
    pub deck_distance: f64,
    pub fidelity: f64,
    pub marginal_size: usize,
}

impl From<&QoaWitness> for WitnessSummary {
    fn from(w: &QoaWitness) -> Self {
        Self {
            verified: w.verified,
            deck_distance: w.deck_distance,
            fidelity: w.fidelity,
            marginal_size: w.marginal_size,
        }
    }
}
