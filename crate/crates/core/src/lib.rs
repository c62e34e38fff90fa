// SPDX-License-Identifier: Apache-2.0

//! Pseudo-Hilbert dilations of quantum dynamics over Poisson chains.
//!
//! The crate is organised bottom-up:
//!
//! - [`pseudo`]: indefinite metrics, the `⋆`-adjoint and the Itô increment
//!   representations.
//! - [`chains`]: finite point configurations, Poisson sampling and
//!   expectation estimators.
//! - [`dilation`]: compound object-plus-apparatus states and the derived
//!   propagators.
//!
//! Monte Carlo reductions run on rayon when the `parallel` feature is on and
//! are bit-identical to the sequential path either way.

pub mod chains;
pub mod dilation;
pub mod error;
pub mod hamiltonian;
pub mod interaction;
pub mod linalg;
pub mod montecarlo;
pub mod pseudo;

pub use chains::{
    exact_expectation, matrix_exponential, mc_expectation, mc_expectation_with, Chain, Method,
    PoissonConfig, PropagatorEstimate,
};
pub use dilation::{
    entanglement_rank, evolve_on_chain, large_number_sweep, output_measure, partial_dilation_propagator,
    project_output, semi_tensor_square, CompoundState, PartialDilationConfig,
};
pub use error::{Error, Result};
pub use hamiltonian::Hamiltonian;
pub use interaction::{build_interaction, InteractionOperator};
pub use linalg::C64;
pub use montecarlo::Execution;
pub use pseudo::{star_adjoint, IncrementKind, IncrementRep, Metric, PseudoOperator};
