use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cross::{block_from_vectors, CrossCutSpec};
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, numerical_rank_complex, CMatrix};
use crate::state::PartyStructure;

/// Relative singular-value cutoff used when ranking the sample matrix.
pub const DEFAULT_LEMMA_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceCheck {
    pub pair: (usize, usize),
    pub entries: usize,
    pub trials: usize,
    pub measured_rank: usize,
    /// `entries - 4`: one trace-zero relation each for `Q`, `L`, `P`, `M`.
    pub predicted_rank: usize,
}

impl DependenceCheck {
    pub fn holds(&self) -> bool {
        self.measured_rank == self.predicted_rank
    }
}

fn positions_within(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    outer
        .iter()
        .enumerate()
        .filter(|(_, p)| inner.contains(p))
        .map(|(i, _)| i)
        .collect()
}

/// Samples independent Haar bases on `AB` and `CD`, collects every entry of
/// `Q, L, P, M` for the pair `(i, j)` as one row per trial, and measures the
/// numerical rank of the stacked matrix.
pub fn verify_dependence_lemma(
    structure: &PartyStructure,
    spec: &CrossCutSpec,
    pair: (usize, usize),
    trials: usize,
    seed: u64,
    rank_tol: f64,
) -> Result<DependenceCheck> {
    if spec.num_parties() != structure.num_parties() {
        return Err(Error::StructureMismatch);
    }
    let (ab, cd) = (spec.ab(), spec.cd());
    let (dab, dcd) = (structure.dim_of(&ab), structure.dim_of(&cd));
    let (i, j) = pair;
    if i == j || i >= dab.min(dcd) || j >= dab.min(dcd) {
        return Err(Error::InvalidConfig(format!(
            "pair ({i}, {j}) must be two distinct indices below {}",
            dab.min(dcd)
        )));
    }
    let (da, db, dc, dd) = spec.block_dims(structure);
    let entries = da * da + db * db + dc * dc + dd * dd;
    if trials < entries {
        return Err(Error::TooFewTrials { trials, entries });
    }

    let dims = structure.local_dims();
    let ldims: Vec<usize> = ab.positions().iter().map(|&p| dims[p]).collect();
    let rdims: Vec<usize> = cd.positions().iter().map(|&p| dims[p]).collect();
    let pos_a = positions_within(ab.parties(), spec.a().parties());
    let pos_b = positions_within(ab.parties(), spec.b().parties());
    let pos_c = positions_within(cd.parties(), spec.c().parties());
    let pos_d = positions_within(cd.parties(), spec.d().parties());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = CMatrix::zeros(trials, entries);
    for t in 0..trials {
        let u = haar_unitary(dab, &mut rng);
        let v = haar_unitary(dcd, &mut rng);
        let col = |m: &CMatrix, k: usize| m.column(k).iter().copied().collect::<Vec<_>>();
        let block = block_from_vectors(
            &col(&u, i),
            &col(&u, j),
            &col(&v, i),
            &col(&v, j),
            &ldims,
            &rdims,
            (&pos_a, &pos_b, &pos_c, &pos_d),
        );
        let row = [&block.q, &block.l, &block.p, &block.m]
            .into_iter()
            .flat_map(|m| m.iter().copied());
        for (k, x) in row.enumerate() {
            samples[(t, k)] = x;
        }
    }
    Ok(DependenceCheck {
        pair,
        entries,
        trials,
        measured_rank: numerical_rank_complex(&samples, rank_tol),
        predicted_rank: entries - 4,
    })
}
