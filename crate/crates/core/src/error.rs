use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid party structure: {0}")]
    InvalidStructure(String),

    #[error("total dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid party subset {parties:?}: {reason}")]
    InvalidSubset { parties: Vec<usize>, reason: String },

    #[error("invalid bipartition: {0}")]
    InvalidCut(String),

    #[error("invalid block specification: {0}")]
    InvalidBlocks(String),

    #[error("invalid marginal family: {0}")]
    InvalidFamily(String),

    #[error("basis string {basis:?}: {reason}")]
    InvalidBasis { basis: String, reason: String },

    #[error("duplicate basis entry {0:?}")]
    DuplicateBasis(String),

    #[error("amplitude vector is zero")]
    ZeroVector,

    #[error("squared norm {norm_sq} deviates from 1 beyond tolerance (pass normalize to rescale)")]
    NotNormalized { norm_sq: f64 },

    #[error("party structures do not match")]
    StructureMismatch,

    #[error("marginal families do not match")]
    FamilyMismatch,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),

    #[error("invalid array: {0}")]
    InvalidArray(String),

    #[error("amplitude {index} is below the floor {floor}")]
    ZeroAmplitude { index: usize, floor: f64 },

    #[error("all phases are equal; the witness would coincide with the input")]
    AllPhasesEqual,

    #[error("strength {k} exceeds floor(N/2) = {max} for N = {n}")]
    StrengthOutOfScope { k: usize, n: usize, max: usize },

    #[error("{trials} trials are fewer than the {entries} entries being ranked")]
    TooFewTrials { trials: usize, entries: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
