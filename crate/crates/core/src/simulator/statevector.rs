use num_complex::Complex64;

use super::circuit::{Circuit, Gate};
use super::gates::{self, Matrix2};
use crate::error::{Error, Result};

/// Largest register simulated as a state vector.
pub const MAX_STATEVECTOR_QUBITS: usize = 20;

/// Pure state over `n` qubits; qubit 0 is the least significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::contract(format!(
                "state vector limited to {MAX_STATEVECTOR_QUBITS} qubits, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero_state(n_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(Error::contract(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim > 1 << MAX_STATEVECTOR_QUBITS {
            return Err(Error::contract(format!(
                "amplitude count {dim} is not a supported power of two"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => self.apply_1q(q, &gates::hadamard()),
            Gate::Rx(q, theta) => self.apply_1q(q, &gates::rx(theta)),
            Gate::Rz(q, theta) => {
                let (p0, p1) = gates::rz_phases(theta);
                let bit = 1 << q;
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { p0 } else { p1 };
                }
            }
            Gate::Rzz(q1, q2, theta) => {
                let (even, odd) = gates::rz_phases(theta);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if (i >> q1 ^ i >> q2) & 1 == 0 { even } else { odd };
                }
            }
            Gate::MeasureAll => {}
        }
    }

    fn apply_1q(&mut self, q: usize, m: &Matrix2) {
        let bit = 1 << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
}

/// Applies every gate of `c` to `|0...0>`.
pub fn run_statevector(c: &Circuit) -> Result<StateVector> {
    let mut state = StateVector::zero_state(c.n_qubits())?;
    for gate in c.gates() {
        state.apply(gate);
    }
    Ok(state)
}
