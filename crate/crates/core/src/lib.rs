//! QAOA for minimum vertex cover.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: graphs, isomorphism-class enumeration and exact covers.
//! - [`hamiltonian`]: penalty encoding as a diagonal Ising operator.
//! - [`simulator`]: the ansatz circuit and its exact, shot and noisy backends.
//! - [`gradient`]: parameter-shift and finite-difference gradients.
//! - [`optimizers`]: classical minimizers under an evaluation budget.
//! - [`harness`]: seeded, resumable experiment grids and their records.

// `!(x > 0.0)` guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod hamiltonian;
pub mod optimizers;
pub mod gradient;
pub mod harness;
pub mod seed;
pub mod simulator;

pub use error::{Error, Result};
pub use graph::{BitString, CoverSolution, Graph};
pub use hamiltonian::{IsingHamiltonian, PenaltyWeights};
