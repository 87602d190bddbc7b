//! Partial traces, decks of marginals and deck comparison.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, matricize, CMatrix};
use crate::state::{PartyStructure, PureState, Subset};

/// Default per-marginal Frobenius tolerance for deck equality.
pub const DEFAULT_DECK_TOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

/// Reduced density matrix of a subset of parties. Rows and columns run over
/// the subset's parties in ascending order, most significant first.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    parties: Subset,
    matrix: CMatrix,
}

impl Marginal {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(parties: Subset, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidMarginal("matrix is not square".into()));
        }
        if frobenius(&(&matrix - matrix.adjoint())) > HERMITIAN_TOL {
            return Err(Error::InvalidMarginal("matrix is not Hermitian".into()));
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidMarginal(format!("trace is {trace}")));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidMarginal(format!(
                "eigenvalue {min_eig} is negative"
            )));
        }
        Ok(Self { parties, matrix })
    }

    pub fn parties(&self) -> &Subset {
        &self.parties
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in decreasing order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Traces this marginal further down to `keep`, which must be a subset of
    /// its parties.
    pub fn reduce(&self, structure: &PartyStructure, keep: &Subset) -> Result<Marginal> {
        if keep.is_empty() || !keep.is_subset_of(&self.parties) {
            return Err(Error::InvalidSubset {
                parties: keep.parties().to_vec(),
                reason: format!("not a nonempty subset of {}", self.parties),
            });
        }
        let dims: Vec<usize> = self
            .parties
            .parties()
            .iter()
            .map(|p| structure.local_dims()[p - 1])
            .collect();
        let keep_pos: Vec<usize> = self
            .parties
            .parties()
            .iter()
            .enumerate()
            .filter(|(_, p)| keep.contains(**p))
            .map(|(i, _)| i)
            .collect();
        // rho = sum_k w_k |v_k><v_k|; reduce each eigen-component.
        let eig = self.matrix.clone().symmetric_eigen();
        let kdim: usize = keep_pos.iter().map(|&p| dims[p]).product();
        let mut out = CMatrix::zeros(kdim, kdim);
        for (k, &w) in eig.eigenvalues.iter().enumerate() {
            if w.abs() < 1e-300 {
                continue;
            }
            let v: Vec<Complex64> = eig.eigenvectors.column(k).iter().cloned().collect();
            let m = matricize(&v, &dims, &keep_pos);
            out += (&m * m.adjoint()) * Complex64::new(w, 0.0);
        }
        Ok(Marginal {
            parties: keep.clone(),
            matrix: out,
        })
    }
}

/// `Tr_{keep^C} |psi><psi|`.
pub fn partial_trace(state: &PureState, keep: &Subset) -> Result<Marginal> {
    let n = state.num_parties();
    if keep.is_empty() {
        return Err(Error::InvalidSubset {
            parties: vec![],
            reason: "empty subset".into(),
        });
    }
    if keep.parties().iter().any(|&p| p > n) {
        return Err(Error::InvalidSubset {
            parties: keep.parties().to_vec(),
            reason: format!("outside 1..={n}"),
        });
    }
    let m = matricize(
        state.amplitudes(),
        state.structure().local_dims(),
        &keep.positions(),
    );
    Ok(Marginal {
        parties: keep.clone(),
        matrix: &m * m.adjoint(),
    })
}

/// An ordered, duplicate-free family of nonempty party subsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalFamily {
    num_parties: usize,
    subsets: Vec<Subset>,
}

impl MarginalFamily {
    pub fn new(num_parties: usize, subsets: Vec<Subset>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &subsets {
            if s.is_empty() {
                return Err(Error::InvalidFamily("empty subset".into()));
            }
            if s.parties().iter().any(|&p| p == 0 || p > num_parties) {
                return Err(Error::InvalidFamily(format!(
                    "{s} not within 1..={num_parties}"
                )));
            }
            if !seen.insert(s.clone()) {
                return Err(Error::InvalidFamily(format!("duplicate subset {s}")));
            }
        }
        Ok(Self {
            num_parties,
            subsets,
        })
    }

    /// Builds a family, silently dropping repeated subsets.
    pub fn deduplicated(
        num_parties: usize,
        subsets: impl IntoIterator<Item = Subset>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let unique = subsets
            .into_iter()
            .filter(|s| seen.insert(s.clone()))
            .collect();
        Self::new(num_parties, unique)
    }

    /// All `C(n, k)` subsets of size `k`, in lexicographic order.
    pub fn complete(num_parties: usize, k: usize) -> Result<Self> {
        if k == 0 || k > num_parties {
            return Err(Error::InvalidFamily(format!(
                "k = {k} not in 1..={num_parties}"
            )));
        }
        let subsets = k_subsets(num_parties, k)
            .into_iter()
            .map(|v| Subset::new(v, num_parties))
            .collect::<Result<_>>()?;
        Self::new(num_parties, subsets)
    }

    /// Parses `k=<int>` (complete k-deck) or `1,2,3;4,5,6;...`.
    pub fn parse(spec: &str, num_parties: usize) -> Result<Self> {
        let spec = spec.trim();
        if let Some(k) = spec.strip_prefix("k=") {
            let k = k
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad k in {spec:?}")))?;
            return Self::complete(num_parties, k);
        }
        let subsets = spec
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Subset::parse(s, num_parties))
            .collect::<Result<_>>()?;
        Self::new(num_parties, subsets)
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

/// Lexicographically ordered `k`-subsets of `{1..=n}`.
pub(crate) fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Marginals of one state, aligned with a family.
#[derive(Clone, Debug, PartialEq)]
pub struct Deck {
    family: MarginalFamily,
    marginals: Vec<Marginal>,
}

impl Deck {
    pub fn family(&self) -> &MarginalFamily {
        &self.family
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<MarginalRecord> =
            self.marginals.iter().map(MarginalRecord::from).collect();
        serde_json::to_value(entries).expect("deck serialization is infallible")
    }

    /// Rebuilds a deck from the form written by [`Deck::to_json`]. Each
    /// marginal is validated.
    pub fn from_json(value: serde_json::Value, num_parties: usize) -> Result<Self> {
        let records: Vec<MarginalRecord> = serde_json::from_value(value)?;
        let mut subsets = Vec::with_capacity(records.len());
        let mut marginals = Vec::with_capacity(records.len());
        for r in &records {
            let parties = Subset::new(r.parties.clone(), num_parties)?;
            subsets.push(parties.clone());
            marginals.push(Marginal::new(parties, r.to_matrix()?)?);
        }
        Ok(Self {
            family: MarginalFamily::new(num_parties, subsets)?,
            marginals,
        })
    }
}

/// JSON form of a marginal: row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginalRecord {
    pub parties: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl From<&Marginal> for MarginalRecord {
    fn from(m: &Marginal) -> Self {
        let matrix = (0..m.dim())
            .map(|r| {
                (0..m.dim())
                    .map(|c| [m.matrix[(r, c)].re, m.matrix[(r, c)].im])
                    .collect()
            })
            .collect();
        Self {
            parties: m.parties.parties().to_vec(),
            matrix,
        }
    }
}

impl MarginalRecord {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.matrix.len();
        if self.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMarginal("ragged matrix".into()));
        }
        Ok(DMatrix::from_fn(n, n, |r, c| {
            let [re, im] = self.matrix[r][c];
            Complex64::new(re, im)
        }))
    }
}

/// Marginals of `state` for every subset of `family`, in family order.
pub fn compute_deck(state: &PureState, family: &MarginalFamily) -> Result<Deck> {
    if family.num_parties() != state.num_parties() {
        return Err(Error::FamilyMismatch);
    }
    let marginals = family
        .subsets()
        .par_iter()
        .map(|s| partial_trace(state, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Deck {
        family: family.clone(),
        marginals,
    })
}

/// Maximum Frobenius distance across aligned marginals.
pub fn deck_distance(a: &Deck, b: &Deck) -> Result<f64> {
    if a.family != b.family {
        return Err(Error::FamilyMismatch);
    }
    a.marginals
        .iter()
        .zip(&b.marginals)
        .map(|(x, y)| marginal_distance(x, y))
        .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
}

/// Like [`deck_distance`] but pairs marginals by party set instead of position.
pub fn deck_distance_unordered(a: &Deck, b: &Deck) -> Result<f64> {
    if a.family.num_parties != b.family.num_parties || a.marginals.len() != b.marginals.len() {
        return Err(Error::FamilyMismatch);
    }
    let mut worst = 0.0f64;
    for x in &a.marginals {
        let y = b
            .marginals
            .iter()
            .find(|y| y.parties == x.parties)
            .ok_or(Error::FamilyMismatch)?;
        worst = worst.max(marginal_distance(x, y)?);
    }
    Ok(worst)
}

fn marginal_distance(x: &Marginal, y: &Marginal) -> Result<f64> {
    if x.parties != y.parties || x.dim() != y.dim() {
        return Err(Error::FamilyMismatch);
    }
    Ok(frobenius(&(&x.matrix - &y.matrix)))
}

/// Deck distance between two states over `family`.
pub fn state_deck_distance(a: &PureState, b: &PureState, family: &MarginalFamily) -> Result<f64> {
    if a.structure() != b.structure() {
        return Err(Error::StructureMismatch);
    }
    deck_distance(&compute_deck(a, family)?, &compute_deck(b, family)?)
}
