use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::cross::{build_cross_matrices, CrossCutSpec};
use super::gamma::{
    assemble_gamma_system, decide_null_space, EquationCounts, GammaSystem, NullSpace,
};
use crate::error::{Error, Result};
use crate::hypergraph::UnionFind;
use crate::marginal::{compute_deck, deck_distance, MarginalFamily};
use crate::schmidt::{
    classify_genericity_with_tol, phase_twist, schmidt_decompose, GenericityReport,
    SchmidtDecomposition,
};
use crate::state::{fidelity_up_to_phase, PureState};
use crate::tolerances::Tolerances;

/// Null-basis rows below this magnitude pin a pair's phases together.
const LOCK_TOL: f64 = 1e-8;
/// Candidate phase vectors must leave a residual below this, relative to
/// `sigma_max * |gamma|`, before a full deck check is attempted.
const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UdpStatus {
    CertifiedUdp,
    NotUdpWitnessed,
    Inconclusive,
}

impl std::fmt::Display for UdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UdpStatus::CertifiedUdp => "CERTIFIED_UDP",
            UdpStatus::NotUdpWitnessed => "NOT_UDP_WITNESSED",
            UdpStatus::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub tolerances: Tolerances,
    /// Marginals a witness must also reproduce, on top of `AB, CD, AC, BD`.
    pub extra_family: Option<MarginalFamily>,
    /// A witness must have fidelity up to phase below `1 - distinct_tol`.
    pub distinct_tol: f64,
    pub search_seed: u64,
    pub random_tries: usize,
    pub max_sign_patterns: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            extra_family: None,
            distinct_tol: 1e-6,
            search_seed: 0,
            random_tries: 32,
            max_sign_patterns: 256,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UdpVerdict {
    pub status: UdpStatus,
    pub null_dim: usize,
    pub genericity: GenericityReport,
    pub equation_counts: EquationCounts,
    /// Complex pair unknowns, `r(r-1)/2`.
    pub variables: usize,
    pub schmidt_rank: usize,
    /// Rank 1 across `AB|CD`: the state is already fixed by those two marginals.
    pub primary_cut_product: bool,
    /// `sigma_min / sigma_max` of the phase system; absent when it has no unknowns.
    pub min_singular_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<PureState>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_deck_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_fidelity: Option<f64>,
}

/// [`certify_udp_with`] under default options.
pub fn certify_udp(state: &PureState, spec: &CrossCutSpec) -> Result<UdpVerdict> {
    certify_udp_with(state, spec, &CertifyOptions::default())
}

pub fn certify_udp_with(
    state: &PureState,
    spec: &CrossCutSpec,
    options: &CertifyOptions,
) -> Result<UdpVerdict> {
    options.tolerances.validate()?;
    if spec.num_parties() != state.num_parties() {
        return Err(Error::InvalidBlocks(format!(
            "blocks are over {} parties but the state has {}",
            spec.num_parties(),
            state.num_parties()
        )));
    }
    let family = witness_family(spec, options.extra_family.as_ref())?;
    let structure = state.structure();
    let dec = schmidt_decompose(state, &spec.primary_cut())?;
    let ambient = structure
        .dim_of(&spec.ab())
        .min(structure.dim_of(&spec.cd()));
    let genericity = classify_genericity_with_tol(&dec, ambient, options.tolerances.gap_tol);
    let system = assemble_gamma_system(&build_cross_matrices(&dec, spec)?);
    let null = decide_null_space(&system, options.tolerances.svd_tol);

    let mut verdict = UdpVerdict {
        status: UdpStatus::Inconclusive,
        null_dim: null.null_dim,
        genericity,
        equation_counts: system.counts,
        variables: system.complex_unknowns(),
        schmidt_rank: dec.rank(),
        primary_cut_product: dec.rank() == 1,
        min_singular_ratio: singular_ratio(&null),
        witness: None,
        witness_deck_distance: None,
        witness_fidelity: None,
    };
    if null.null_dim == 0 {
        if verdict.genericity.is_generic() {
            verdict.status = UdpStatus::CertifiedUdp;
        }
        return Ok(verdict);
    }
    if let Some(found) = search_witness(state, &dec, &system, &null, &family, options)? {
        verdict.status = UdpStatus::NotUdpWitnessed;
        verdict.witness_deck_distance = Some(found.deck_distance);
        verdict.witness_fidelity = Some(found.fidelity);
        verdict.witness = Some(found.state);
    }
    Ok(verdict)
}

fn singular_ratio(null: &NullSpace) -> Option<f64> {
    let max = *null.singular_values.first()?;
    let min = *null.singular_values.last()?;
    (max > 0.0).then(|| min / max)
}

fn witness_family(spec: &CrossCutSpec, extra: Option<&MarginalFamily>) -> Result<MarginalFamily> {
    let mut subsets = spec.cut_subsets().to_vec();
    if let Some(extra) = extra {
        if extra.num_parties() != spec.num_parties() {
            return Err(Error::FamilyMismatch);
        }
        subsets.extend(extra.subsets().iter().cloned());
    }
    MarginalFamily::deduplicated(spec.num_parties(), subsets)
}

struct Witness {
    state: PureState,
    deck_distance: f64,
    fidelity: f64,
}

/// Groups Schmidt indices whose pair variable is forced to zero by the null space.
fn phase_components(rank: usize, system: &GammaSystem, null: &NullSpace) -> Vec<usize> {
    let mut uf = UnionFind::new(rank);
    if let Some(basis) = &null.basis {
        for (k, &(i, j)) in system.pairs.iter().enumerate() {
            let free =
                (2 * k..2 * k + 2).any(|row| basis.row(row).iter().any(|x| x.abs() > LOCK_TOL));
            if !free {
                uf.union(i, j);
            }
        }
    }
    uf.labels()
}

fn gamma_of(phases: &[f64], lambdas: &[f64], pairs: &[(usize, usize)]) -> Vec<Complex64> {
    pairs
        .iter()
        .map(|&(i, j)| {
            (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, phases[i] - phases[j]))
                * (lambdas[i] * lambdas[j]).sqrt()
        })
        .collect()
}

fn search_witness(
    state: &PureState,
    dec: &SchmidtDecomposition,
    system: &GammaSystem,
    null: &NullSpace,
    family: &MarginalFamily,
    options: &CertifyOptions,
) -> Result<Option<Witness>> {
    let labels = phase_components(dec.rank(), system, null);
    let n_comp = labels.iter().max().map_or(0, |m| m + 1);
    if n_comp < 2 {
        return Ok(None);
    }
    let lambdas = dec.lambdas();
    let sigma_max = null.singular_values.first().copied().unwrap_or(0.0);
    let reference = compute_deck(state, family)?;

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let sign_bits = (n_comp - 1).min(usize::BITS as usize - 1);
    let patterns = (1usize << sign_bits)
        .saturating_sub(1)
        .min(options.max_sign_patterns);
    for mask in 1..=patterns {
        let comp_phase: Vec<f64> = (0..n_comp)
            .map(|c| {
                if c > 0 && mask.checked_shr((c - 1) as u32).unwrap_or(0) & 1 == 1 {
                    PI
                } else {
                    0.0
                }
            })
            .collect();
        candidates.push(comp_phase);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.search_seed);
    for _ in 0..options.random_tries {
        let comp_phase: Vec<f64> = (0..n_comp)
            .map(|c| {
                if c == 0 {
                    0.0
                } else {
                    rng.random::<f64>() * TAU
                }
            })
            .collect();
        candidates.push(comp_phase);
    }

    for comp_phase in candidates {
        let phases: Vec<f64> = labels.iter().map(|&c| comp_phase[c]).collect();
        let gamma = gamma_of(&phases, &lambdas, &system.pairs);
        let gamma_norm = gamma.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
        if gamma_norm == 0.0 {
            continue;
        }
        let residual = DVector::from_vec(system.apply(&gamma)).norm();
        if residual > RESIDUAL_TOL * sigma_max.max(1.0) * gamma_norm {
            continue;
        }
        let candidate = phase_twist(dec, &phases)?;
        let fidelity = fidelity_up_to_phase(state, &candidate)?;
        if fidelity >= 1.0 - options.distinct_tol {
            continue;
        }
        let distance = deck_distance(&reference, &compute_deck(&candidate, family)?)?;
        if distance <= options.tolerances.deck_tol {
            return Ok(Some(Witness {
                state: candidate,
                deck_distance: distance,
                fidelity,
            }));
        }
    }
    Ok(None)
}
