//! Circuit construction and three execution backends: exact state vector,
//! shot-sampled state vector and shot-sampled noisy density matrix.

mod circuit;
mod density;
mod gates;
mod noise;
mod sampling;
mod statevector;

pub use circuit::{
    build_qaoa_circuit, build_qaoa_circuit_with_bindings, Circuit, Gate, ParamBinding,
    QaoaCircuit, QaoaParams,
};
pub use density::{run_density_matrix, DensityMatrix, MAX_DENSITY_QUBITS};
pub use noise::{Confusion, NoiseModel, PerQubit};
pub use sampling::{expectation_from_counts, sample, ShotCounts};
pub use statevector::{run_statevector, StateVector, MAX_STATEVECTOR_QUBITS};

pub(crate) use sampling::{expectation_with_diagonal, sample_probabilities};

use crate::error::{Error, Result};
use crate::hamiltonian::{diagonal, IsingHamiltonian};

/// Output of a backend.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.n_qubits(),
            QuantumState::Mixed(r) => r.n_qubits(),
        }
    }

    /// Computational-basis outcome distribution.
    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure(s) => s.probabilities(),
            QuantumState::Mixed(r) => r.probabilities(),
        }
    }
}

/// `<H>` including the constant term.
pub fn expectation_exact(s: &QuantumState, h: &IsingHamiltonian) -> Result<f64> {
    if s.n_qubits() != h.n_qubits() {
        return Err(Error::contract(format!(
            "state has {} qubits, Hamiltonian has {}",
            s.n_qubits(),
            h.n_qubits()
        )));
    }
    Ok(expectation_with(&s.probabilities(), &diagonal(h)?))
}

pub(crate) fn expectation_with(probs: &[f64], diag: &[f64]) -> f64 {
    probs.iter().zip(diag).map(|(p, d)| p * d).sum()
}
