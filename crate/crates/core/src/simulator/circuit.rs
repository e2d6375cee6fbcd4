use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::IsingHamiltonian;

/// Gate set of the ansatz. Rotation angles use the `exp(-iθG/2)` convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    Rz(usize, f64),
    Rzz(usize, usize, f64),
    Rx(usize, f64),
    MeasureAll,
}

impl Gate {
    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rz(_, t) | Gate::Rzz(_, _, t) | Gate::Rx(_, t) => Some(t),
            Gate::H(_) | Gate::MeasureAll => None,
        }
    }

    /// Same gate with its rotation angle replaced; non-rotations are unchanged.
    pub fn with_angle(self, theta: f64) -> Self {
        match self {
            Gate::Rz(q, _) => Gate::Rz(q, theta),
            Gate::Rzz(a, b, _) => Gate::Rzz(a, b, theta),
            Gate::Rx(q, _) => Gate::Rx(q, theta),
            other => other,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Rzz(..))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let in_range = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::contract(format!(
                    "qubit {q} out of range for {n_qubits}-qubit circuit"
                )))
            }
        };
        for (i, gate) in gates.iter().enumerate() {
            match *gate {
                Gate::H(q) | Gate::Rz(q, _) | Gate::Rx(q, _) => in_range(q)?,
                Gate::Rzz(a, b, _) => {
                    in_range(a)?;
                    in_range(b)?;
                    if a == b {
                        return Err(Error::contract(format!("RZZ on repeated qubit {a}")));
                    }
                }
                Gate::MeasureAll => {
                    if i + 1 != gates.len() {
                        return Err(Error::contract("MEASURE_ALL must be the last gate"));
                    }
                }
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Copy with the rotation angle of gate `index` moved by `delta`.
    pub fn with_shifted_angle(&self, index: usize, delta: f64) -> Self {
        let mut out = self.clone();
        let gate = out.gates[index];
        if let Some(theta) = gate.angle() {
            out.gates[index] = gate.with_angle(theta + delta);
        }
        out
    }
}

/// Depth-`p` angles: `gammas` drive the cost layer, `betas` the mixer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::contract(format!(
                "need p >= 1 gammas and as many betas, got {} and {}",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    /// Splits a flat `[γ₁..γ_p, β₁..β_p]` vector.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::contract(format!(
                "flat parameter vector has odd length {}",
                flat.len()
            )));
        }
        let (g, b) = flat.split_at(flat.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// Links a circuit gate to the flat parameter it depends on:
/// `gate angle = coefficient · params[param]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBinding {
    pub gate: usize,
    pub param: usize,
    pub coefficient: f64,
}

/// A QAOA circuit together with the parameter dependence of its gates.
#[derive(Debug, Clone)]
pub struct QaoaCircuit {
    pub circuit: Circuit,
    pub bindings: Vec<ParamBinding>,
}

/// `|+>^n` preparation followed by `p` cost/mixer layers. The constant term
/// of `h` is a global phase and emits no gate; zero linear terms are skipped.
pub fn build_qaoa_circuit(h: &IsingHamiltonian, params: &QaoaParams) -> Circuit {
    build_qaoa_circuit_with_bindings(h, params).circuit
}

pub fn build_qaoa_circuit_with_bindings(h: &IsingHamiltonian, params: &QaoaParams) -> QaoaCircuit {
    let n = h.n_qubits();
    let p = params.depth();
    let mut gates: Vec<Gate> = (0..n).map(Gate::H).collect();
    let mut bindings = Vec::new();
    let mut bind = |gates: &mut Vec<Gate>, gate: Gate, param: usize, coefficient: f64| {
        bindings.push(ParamBinding {
            gate: gates.len(),
            param,
            coefficient,
        });
        gates.push(gate);
    };
    for k in 0..p {
        let gamma = params.gammas[k];
        for (i, &c) in h.linear().iter().enumerate() {
            if c != 0.0 {
                bind(&mut gates, Gate::Rz(i, 2.0 * gamma * c), k, 2.0 * c);
            }
        }
        for &((u, v), c) in h.quadratic() {
            bind(&mut gates, Gate::Rzz(u, v, 2.0 * gamma * c), k, 2.0 * c);
        }
        let beta = params.betas[k];
        for j in 0..n {
            bind(&mut gates, Gate::Rx(j, 2.0 * beta), p + k, 2.0);
        }
    }
    let circuit = Circuit::new(n, gates).expect("gates built from a valid Hamiltonian");
    QaoaCircuit { circuit, bindings }
}
