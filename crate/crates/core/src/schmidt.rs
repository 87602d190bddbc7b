//! Schmidt decomposition across a bipartition, genericity classification and
//! synthesis of states from the phase family `sum_i e^{i phi_i} sqrt(lambda_i) |i>|i>`.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matricize, unmatricize, CMatrix};
use crate::state::{PartyStructure, PureState, Subset};

/// Singular values at or below `DEFAULT_RANK_TOL * sigma_max` are dropped.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Squared coefficients closer than this count as degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Singular values within this relative distance are ordered by the
/// tie-breaking rule rather than by magnitude.
const TIE_TOL: f64 = 1e-12;

/// A split of `{1..=N}` into two nonempty parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    left: Subset,
    right: Subset,
}

impl Bipartition {
    /// `left | complement(left)`.
    pub fn new(left: Subset, num_parties: usize) -> Result<Self> {
        if left.is_empty() {
            return Err(Error::InvalidCut("left side is empty".into()));
        }
        if left.parties().iter().any(|&p| p > num_parties) {
            return Err(Error::InvalidCut(format!(
                "{left} not within 1..={num_parties}"
            )));
        }
        let right = left.complement(num_parties);
        if right.is_empty() {
            return Err(Error::InvalidCut("right side is empty".into()));
        }
        Ok(Self { left, right })
    }

    pub fn parse(text: &str, num_parties: usize) -> Result<Self> {
        Self::new(Subset::parse(text, num_parties)?, num_parties)
    }

    pub fn left(&self) -> &Subset {
        &self.left
    }

    pub fn right(&self) -> &Subset {
        &self.right
    }

    pub fn num_parties(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

/// `|psi> = sum_i sqrt(lambda_i) |i>_J |i>_{J^C}` with decreasing coefficients.
///
/// Basis vectors live on the factor spaces of `J` and `J^C`, each indexed by
/// its parties in ascending order with the lowest-numbered party as the most
/// significant digit.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    structure: PartyStructure,
    cut: Bipartition,
    coefficients: Vec<f64>,
    left_basis: Vec<Vec<Complex64>>,
    right_basis: Vec<Vec<Complex64>>,
}

impl SchmidtDecomposition {
    pub fn structure(&self) -> &PartyStructure {
        &self.structure
    }

    pub fn cut(&self) -> &Bipartition {
        &self.cut
    }

    /// `sqrt(lambda_i)`, decreasing.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `lambda_i`, decreasing.
    pub fn lambdas(&self) -> Vec<f64> {
        self.coefficients.iter().map(|s| s * s).collect()
    }

    pub fn left_basis(&self) -> &[Vec<Complex64>] {
        &self.left_basis
    }

    pub fn right_basis(&self) -> &[Vec<Complex64>] {
        &self.right_basis
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn left_dims(&self) -> Vec<usize> {
        dims_of(&self.structure, &self.cut.left)
    }

    pub fn right_dims(&self) -> Vec<usize> {
        dims_of(&self.structure, &self.cut.right)
    }

    /// `min(dim J, dim J^C)`, the largest rank the cut admits.
    pub fn ambient_rank(&self) -> usize {
        let l: usize = self.left_dims().iter().product();
        let r: usize = self.right_dims().iter().product();
        l.min(r)
    }

    /// Rebuilds the state from the decomposition.
    pub fn reconstruct(&self) -> PureState {
        phase_twist(self, &vec![0.0; self.rank()]).expect("phase vector has the right length")
    }
}

fn dims_of(structure: &PartyStructure, subset: &Subset) -> Vec<usize> {
    subset
        .parties()
        .iter()
        .map(|p| structure.local_dims()[p - 1])
        .collect()
}

/// Key for ordering degenerate Schmidt vectors: position of the first
/// nonzero component, then its real and imaginary parts.
fn tie_key(v: &[Complex64]) -> (usize, f64, f64) {
    v.iter()
        .enumerate()
        .find(|(_, z)| z.norm() > 1e-12)
        .map(|(i, z)| (i, z.re, z.im))
        .unwrap_or((usize::MAX, 0.0, 0.0))
}

pub fn schmidt_decompose(state: &PureState, cut: &Bipartition) -> Result<SchmidtDecomposition> {
    schmidt_decompose_with_tol(state, cut, DEFAULT_RANK_TOL)
}

pub fn schmidt_decompose_with_tol(
    state: &PureState,
    cut: &Bipartition,
    rank_tol: f64,
) -> Result<SchmidtDecomposition> {
    if cut.num_parties() != state.num_parties() {
        return Err(Error::InvalidCut(format!(
            "cut covers {} parties, state has {}",
            cut.num_parties(),
            state.num_parties()
        )));
    }
    let m = matricize(
        state.amplitudes(),
        state.structure().local_dims(),
        &cut.left.positions(),
    );
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values;
    let max = sv.iter().cloned().fold(0.0f64, f64::max);

    // M = U S V^dagger, so psi_{ab} = sum_i s_i U_{ai} (V^dagger)_{ib}.
    let mut terms: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = (0..sv.len())
        .filter(|&i| sv[i] > rank_tol * max)
        .map(|i| {
            let left: Vec<Complex64> = u.column(i).iter().cloned().collect();
            let right: Vec<Complex64> = v_t.row(i).iter().cloned().collect();
            (sv[i], left, right)
        })
        .collect();

    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Within clusters of equal singular values, fall back to the tie key.
    let mut start = 0;
    while start < terms.len() {
        let mut end = start + 1;
        while end < terms.len() && terms[end - 1].0 - terms[end].0 <= TIE_TOL * max {
            end += 1;
        }
        terms[start..end].sort_by(|a, b| {
            let (ka, kb) = (tie_key(&a.1), tie_key(&b.1));
            ka.0.cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
                .then(Ordering::Equal)
        });
        start = end;
    }

    let mut coefficients = Vec::with_capacity(terms.len());
    let mut left_basis = Vec::with_capacity(terms.len());
    let mut right_basis = Vec::with_capacity(terms.len());
    for (s, l, r) in terms {
        coefficients.push(s);
        left_basis.push(l);
        right_basis.push(r);
    }
    Ok(SchmidtDecomposition {
        structure: state.structure().clone(),
        cut: cut.clone(),
        coefficients,
        left_basis,
        right_basis,
    })
}

/// Rank and degeneracy of a Schmidt spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub full_rank: bool,
    pub distinct_spectrum: bool,
    /// Smallest gap between squared coefficients; absent when the rank is below 2.
    pub min_gap: Option<f64>,
    pub rank: usize,
}

impl GenericityReport {
    pub fn is_generic(&self) -> bool {
        self.full_rank && self.distinct_spectrum
    }
}

pub fn classify_genericity(dec: &SchmidtDecomposition, ambient_rank: usize) -> GenericityReport {
    classify_genericity_with_tol(dec, ambient_rank, DEFAULT_GAP_TOL)
}

pub fn classify_genericity_with_tol(
    dec: &SchmidtDecomposition,
    ambient_rank: usize,
    gap_tol: f64,
) -> GenericityReport {
    let lambdas = dec.lambdas();
    // Sorted, so the minimum gap is between neighbours.
    let min_gap = lambdas
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .reduce(f64::min);
    GenericityReport {
        full_rank: dec.rank() == ambient_rank,
        distinct_spectrum: min_gap.is_none_or(|g| g > gap_tol),
        min_gap,
        rank: dec.rank(),
    }
}

/// `sum_i e^{i phi_i} sqrt(lambda_i) |i>_J |i>_{J^C}`. Shares the marginals on
/// `J` and `J^C` with the decomposed state for any choice of phases.
pub fn phase_twist(dec: &SchmidtDecomposition, phases: &[f64]) -> Result<PureState> {
    if phases.len() != dec.rank() {
        return Err(Error::LengthMismatch {
            expected: dec.rank(),
            found: phases.len(),
        });
    }
    let ldim = dec.left_dims().iter().product();
    let rdim = dec.right_dims().iter().product();
    let mut m = CMatrix::zeros(ldim, rdim);
    for (i, &phi) in phases.iter().enumerate() {
        let w = Complex64::from_polar(dec.coefficients[i], phi);
        for (a, &la) in dec.left_basis[i].iter().enumerate() {
            let la = la * w;
            for (b, &rb) in dec.right_basis[i].iter().enumerate() {
                m[(a, b)] += la * rb;
            }
        }
    }
    let amplitudes = unmatricize(&m, dec.structure.local_dims(), &dec.cut.left.positions());
    PureState::from_amplitudes(dec.structure.clone(), amplitudes, true)
}
