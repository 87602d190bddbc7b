//! Uniqueness-among-pure-states certification from two crossing bipartitions.
//!
//! Given blocks `A, B, C, D` partitioning the parties, the Schmidt
//! decomposition across `AB|CD` reduces every competitor sharing `rho_AB` and
//! `rho_CD` to a choice of phases. Requiring `rho_AC` and `rho_BD` to agree as
//! well gives a homogeneous real-linear system in the pair variables
//! `gamma_ij = (1 - e^{i(phi_i - phi_j)}) sqrt(lambda_i lambda_j)`; a trivial
//! null space pins all phases together.

mod certify;
mod counting;
mod cross;
mod gamma;
mod lemma;

pub use certify::{certify_udp, certify_udp_with, CertifyOptions, UdpStatus, UdpVerdict};
pub(crate) use counting::surplus_at;
pub use counting::{
    binomial2, complex_unknowns, predicted_equation_count, worst_case_surplus_closed_form,
    worst_case_surplus_direct,
};
pub use cross::{build_cross_matrices, cross_block, CrossBlock, CrossCutSpec, CrossMatrices};
pub use gamma::{assemble_gamma_system, decide_null_space, EquationCounts, GammaSystem, NullSpace};
pub use lemma::{verify_dependence_lemma, DependenceCheck, DEFAULT_LEMMA_RANK_TOL};

/// Relative singular-value threshold below which a direction counts as null.
pub const DEFAULT_SVD_TOL: f64 = 1e-9;
