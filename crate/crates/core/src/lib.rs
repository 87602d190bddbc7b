//! Marginals of multipartite pure states and when they pin the state down.
//!
//! The crate covers reduced density matrices and decks ([`marginal`]),
//! Schmidt decompositions and phase twists ([`schmidt`]), certification from
//! two crossing bipartitions ([`udp`]), hypergraph connectivity of marginal
//! families ([`hypergraph`]), and witnesses built from orthogonal and packing
//! arrays ([`arrays`], [`qoa`]). [`experiment`] runs seeded batches.

pub mod arrays;
pub mod error;
pub mod experiment;
pub mod hypergraph;
mod linalg;
pub mod marginal;
pub mod qoa;
pub mod schmidt;
pub mod state;
pub mod tolerances;
pub mod udp;

pub use error::{Error, Result};
pub use marginal::{compute_deck, deck_distance, partial_trace, Deck, Marginal, MarginalFamily};
pub use schmidt::{
    phase_twist, schmidt_decompose, Bipartition, GenericityReport, SchmidtDecomposition,
};
pub use state::{
    fidelity_up_to_phase, inner_product, sample_haar_state, PartyStructure, PureState, Subset,
};
pub use tolerances::Tolerances;
pub use udp::{certify_udp, certify_udp_with, CertifyOptions, CrossCutSpec, UdpStatus, UdpVerdict};

/// Complex dense matrix type used for marginals.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
