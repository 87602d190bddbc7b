//! Pure states over a multi-qudit computational basis.
//!
//! Basis indices are mixed-radix numbers with party 1 as the most significant
//! digit, so the digit string of an index reads left to right as parties
//! `1..=N`. Every deck comparison in the crate depends on this convention.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 1 << 16;
/// Default tolerance on `| ||psi||^2 - 1 |`.
pub const DEFAULT_NORM_TOL: f64 = 1e-12;

/// A sorted, duplicate-free set of parties, numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(Vec<usize>);

impl Subset {
    /// Builds a subset of `{1..=n}`. Input order does not matter, but
    /// duplicates and out-of-range parties are rejected.
    pub fn new(mut parties: Vec<usize>, n: usize) -> Result<Self> {
        let original = parties.clone();
        parties.sort_unstable();
        if parties.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset {
                parties: original,
                reason: "duplicate party".into(),
            });
        }
        if let Some(&p) = parties.iter().find(|&&p| p == 0 || p > n) {
            return Err(Error::InvalidSubset {
                parties: original,
                reason: format!("party {p} outside 1..={n}"),
            });
        }
        Ok(Self(parties))
    }

    pub fn full(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn parties(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, party: usize) -> bool {
        self.0.binary_search(&party).is_ok()
    }

    /// Zero-based positions of the parties.
    pub fn positions(&self) -> Vec<usize> {
        self.0.iter().map(|p| p - 1).collect()
    }

    pub fn complement(&self, n: usize) -> Self {
        Self((1..=n).filter(|p| !self.contains(*p)).collect())
    }

    pub fn union(&self, other: &Subset) -> Self {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.0.iter().all(|p| other.contains(*p))
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.0.iter().all(|p| !other.contains(*p))
    }

    /// Parses `"1,2,3"` (whitespace tolerated). An empty string is the empty set.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::empty());
        }
        let parties = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad party index {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parties, n)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Number of parties and their local dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyStructure {
    local_dims: Vec<usize>,
    total_dim: usize,
}

impl PartyStructure {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(local_dims, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(local_dims: Vec<usize>, cap: usize) -> Result<Self> {
        if local_dims.is_empty() {
            return Err(Error::InvalidStructure("no parties".into()));
        }
        if let Some(d) = local_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidStructure(format!(
                "local dimension {d} is below 2"
            )));
        }
        let mut total: usize = 1;
        for &d in &local_dims {
            total = match total.checked_mul(d) {
                Some(t) if t <= cap => t,
                _ => {
                    return Err(Error::DimensionCap {
                        dim: local_dims.iter().fold(1usize, |a, &d| a.saturating_mul(d)),
                        cap,
                    })
                }
            };
        }
        Ok(Self {
            local_dims,
            total_dim: total,
        })
    }

    /// `n` parties of equal local dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn num_parties(&self) -> usize {
        self.local_dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Dimension of the factor space spanned by `subset`.
    pub fn dim_of(&self, subset: &Subset) -> usize {
        subset
            .parties()
            .iter()
            .map(|p| self.local_dims[p - 1])
            .product()
    }

    pub fn subset(&self, parties: Vec<usize>) -> Result<Subset> {
        Subset::new(parties, self.num_parties())
    }

    /// Mixed-radix digits of `index`, party 1 first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.num_parties()];
        for (slot, &d) in digits.iter_mut().zip(&self.local_dims).rev() {
            *slot = index % d;
            index /= d;
        }
        digits
    }

    /// Inverse of [`Self::digits`]. Digits are assumed in range.
    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.local_dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    pub fn basis_string(&self, index: usize) -> String {
        self.digits(index)
            .into_iter()
            .map(|x| std::char::from_digit(x as u32, 36).expect("digit below 36"))
            .collect()
    }

    /// Parses a digit string (party 1 leftmost; digits above 9 use `a..z`).
    pub fn parse_basis(&self, basis: &str) -> Result<usize> {
        let chars: Vec<char> = basis.chars().collect();
        if chars.len() != self.num_parties() {
            return Err(Error::InvalidBasis {
                basis: basis.into(),
                reason: format!("expected {} digits", self.num_parties()),
            });
        }
        let mut digits = Vec::with_capacity(chars.len());
        for (pos, (c, &d)) in chars.iter().zip(&self.local_dims).enumerate() {
            let x = c.to_digit(36).ok_or_else(|| Error::InvalidBasis {
                basis: basis.into(),
                reason: format!("character {c:?} is not a digit"),
            })? as usize;
            if x >= d {
                return Err(Error::InvalidBasis {
                    basis: basis.into(),
                    reason: format!(
                        "digit {x} out of range for party {} (dimension {d})",
                        pos + 1
                    ),
                });
            }
            digits.push(x);
        }
        Ok(self.index(&digits))
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateFile", try_from = "StateFile")]
pub struct PureState {
    structure: PartyStructure,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps an amplitude vector. With `normalize` the vector is rescaled to
    /// unit norm; otherwise its squared norm must already be within
    /// [`DEFAULT_NORM_TOL`] of 1.
    pub fn from_amplitudes(
        structure: PartyStructure,
        amplitudes: Vec<Complex64>,
        normalize: bool,
    ) -> Result<Self> {
        Self::from_amplitudes_with_tol(structure, amplitudes, normalize, DEFAULT_NORM_TOL)
    }

    pub fn from_amplitudes_with_tol(
        structure: PartyStructure,
        mut amplitudes: Vec<Complex64>,
        normalize: bool,
        norm_tol: f64,
    ) -> Result<Self> {
        if amplitudes.len() != structure.total_dim() {
            return Err(Error::LengthMismatch {
                expected: structure.total_dim(),
                found: amplitudes.len(),
            });
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq == 0.0 || !norm_sq.is_finite() {
            return Err(Error::ZeroVector);
        }
        if normalize {
            let scale = norm_sq.sqrt().recip();
            amplitudes.iter_mut().for_each(|a| *a *= scale);
        } else if (norm_sq - 1.0).abs() > norm_tol {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self {
            structure,
            amplitudes,
        })
    }

    /// The computational basis state with the given digits.
    pub fn basis_state(structure: PartyStructure, digits: &[usize]) -> Result<Self> {
        if digits.len() != structure.num_parties() {
            return Err(Error::LengthMismatch {
                expected: structure.num_parties(),
                found: digits.len(),
            });
        }
        if digits
            .iter()
            .zip(structure.local_dims())
            .any(|(&x, &d)| x >= d)
        {
            return Err(Error::InvalidBasis {
                basis: format!("{digits:?}"),
                reason: "digit out of range".into(),
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); structure.total_dim()];
        amplitudes[structure.index(digits)] = Complex64::new(1.0, 0.0);
        Ok(Self {
            structure,
            amplitudes,
        })
    }

    /// `alpha|0...0> + beta|1...1>` on `n` qudits of dimension `d`, normalized.
    pub fn generalized_ghz(n: usize, d: usize, alpha: Complex64, beta: Complex64) -> Result<Self> {
        let structure = PartyStructure::uniform(n, d)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); structure.total_dim()];
        amplitudes[0] = alpha;
        amplitudes[structure.index(&vec![1; n])] = beta;
        Self::from_amplitudes(structure, amplitudes, true)
    }

    pub fn structure(&self) -> &PartyStructure {
        &self.structure
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_parties(&self) -> usize {
        self.structure.num_parties()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `e^{i theta} |psi>`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        Self {
            structure: self.structure.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&StateFile::from(self.clone()))
            .expect("state serialization is infallible")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        load_state(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Parses a state from its JSON text form.
pub fn load_state(text: &str) -> Result<PureState> {
    PureState::from_json_str(text)
}

/// On-disk representation of a [`PureState`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub num_parties: usize,
    pub local_dims: Vec<usize>,
    pub amplitudes: Vec<AmplitudeEntry>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub basis: String,
    pub re: f64,
    pub im: f64,
}

impl From<PureState> for StateFile {
    fn from(state: PureState) -> Self {
        let amplitudes = state
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(|(i, a)| AmplitudeEntry {
                basis: state.structure.basis_string(i),
                re: a.re,
                im: a.im,
            })
            .collect();
        StateFile {
            num_parties: state.num_parties(),
            local_dims: state.structure.local_dims().to_vec(),
            amplitudes,
            normalize: false,
        }
    }
}

impl TryFrom<StateFile> for PureState {
    type Error = Error;

    fn try_from(file: StateFile) -> Result<Self> {
        if file.local_dims.len() != file.num_parties {
            return Err(Error::InvalidStructure(format!(
                "num_parties is {} but {} local dimensions were given",
                file.num_parties,
                file.local_dims.len()
            )));
        }
        let structure = PartyStructure::new(file.local_dims)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); structure.total_dim()];
        let mut seen = HashSet::new();
        for entry in &file.amplitudes {
            let index = structure.parse_basis(&entry.basis)?;
            if !seen.insert(index) {
                return Err(Error::DuplicateBasis(entry.basis.clone()));
            }
            amplitudes[index] = Complex64::new(entry.re, entry.im);
        }
        PureState::from_amplitudes(structure, amplitudes, file.normalize)
    }
}

/// Haar-random pure state: i.i.d. standard complex Gaussians, normalized.
pub fn sample_haar_state(structure: &PartyStructure, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_haar_state_with(structure, &mut rng)
}

pub fn sample_haar_state_with<R: Rng + ?Sized>(
    structure: &PartyStructure,
    rng: &mut R,
) -> PureState {
    loop {
        let amplitudes: Vec<Complex64> = (0..structure.total_dim())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(state) = PureState::from_amplitudes(structure.clone(), amplitudes, true) {
            return state;
        }
    }
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<Complex64> {
    if a.structure != b.structure {
        return Err(Error::StructureMismatch);
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `max_theta Re(e^{i theta} <a|b>) = |<a|b>|`; equals 1 iff the states agree
/// up to a global phase.
pub fn fidelity_up_to_phase(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(inner_product(a, b)?.norm())
}
