//! Penalty encoding of minimum vertex cover as a diagonal Ising operator.
//!
//! A bit `x = 1` puts a vertex in the cover and corresponds to spin
//! `s = -1`; bit `0` is spin `+1`, so `x = (1 - s) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_len, BitString, Graph};

/// Largest register for which the full diagonal is materialized.
pub const MAX_DIAGONAL_QUBITS: usize = 20;

/// Weights of the constraint penalty (`a`) and of the cover size (`b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    a: f64,
    b: f64,
}

impl PenaltyWeights {
    /// Requires `a > b > 0` so that every uncovered edge costs more than an
    /// extra vertex.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > 0.0 && a > b) {
            return Err(Error::contract(format!(
                "penalty weights must satisfy a > b > 0, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self { a: 2.0, b: 1.0 }
    }
}

/// `constant + Σ linear[i]·s_i + Σ quadratic[(u,v)]·s_u·s_v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    n_qubits: usize,
    constant: f64,
    linear: Vec<f64>,
    quadratic: Vec<((usize, usize), f64)>,
}

impl IsingHamiltonian {
    pub fn new(
        n_qubits: usize,
        constant: f64,
        linear: Vec<f64>,
        quadratic: Vec<((usize, usize), f64)>,
    ) -> Result<Self> {
        if linear.len() != n_qubits {
            return Err(Error::contract(format!(
                "{} linear coefficients for {n_qubits} qubits",
                linear.len()
            )));
        }
        for &((u, v), _) in &quadratic {
            if u >= v || v >= n_qubits {
                return Err(Error::contract(format!(
                    "quadratic key ({u}, {v}) is not a normalized pair below {n_qubits}"
                )));
            }
        }
        Ok(Self {
            n_qubits,
            constant,
            linear,
            quadratic,
        })
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            constant: 0.0,
            linear: vec![0.0; n_qubits],
            quadratic: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &[((usize, usize), f64)] {
        &self.quadratic
    }

    /// Eigenvalue for basis index `z` (qubit 0 is the least significant bit).
    pub fn energy(&self, z: u32) -> f64 {
        let spin = |i: usize| if z >> i & 1 == 0 { 1.0 } else { -1.0 };
        let lin: f64 = self.linear.iter().enumerate().map(|(i, c)| c * spin(i)).sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|&((u, v), c)| c * spin(u) * spin(v))
            .sum();
        self.constant + lin + quad
    }
}

/// `a·(edges with both endpoints out of the cover) + b·|cover|`.
pub fn classical_cost(g: &Graph, w: PenaltyWeights, z: BitString) -> Result<f64> {
    check_len(g, z)?;
    let violated = g
        .edges()
        .iter()
        .filter(|&&(u, v)| !z.get(u) && !z.get(v))
        .count();
    Ok(w.a * violated as f64 + w.b * f64::from(z.count_ones()))
}

/// Expands the penalty cost with `x = (1 - s)/2`:
/// each edge term `a·(1+s_u)(1+s_v)/4`, each vertex term `b·(1 - s_v)/2`.
pub fn build_ising(g: &Graph, w: PenaltyWeights) -> IsingHamiltonian {
    let n = g.n_vertices();
    let m = g.n_edges() as f64;
    let constant = w.a * m / 4.0 + w.b * n as f64 / 2.0;
    let linear = g
        .degrees()
        .into_iter()
        .map(|d| w.a * d as f64 / 4.0 - w.b / 2.0)
        .collect();
    let quadratic = g.edges().iter().map(|&e| (e, w.a / 4.0)).collect();
    IsingHamiltonian {
        n_qubits: n,
        constant,
        linear,
        quadratic,
    }
}

/// All `2^n` eigenvalues, indexed by basis state.
pub fn diagonal(h: &IsingHamiltonian) -> Result<Vec<f64>> {
    let n = h.n_qubits;
    if n > MAX_DIAGONAL_QUBITS {
        return Err(Error::contract(format!(
            "diagonal limited to {MAX_DIAGONAL_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let mut diag = vec![h.constant; dim];
    for (z, d) in diag.iter_mut().enumerate() {
        for (i, c) in h.linear.iter().enumerate() {
            if z >> i & 1 == 0 {
                *d += c;
            } else {
                *d -= c;
            }
        }
        for &((u, v), c) in &h.quadratic {
            if (z >> u ^ z >> v) & 1 == 0 {
                *d += c;
            } else {
                *d -= c;
            }
        }
    }
    Ok(diag)
}
