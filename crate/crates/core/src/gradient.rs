//! The QAOA objective `F(γ, β)` on a chosen backend and its gradients.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{min_vertex_covers, Graph};
use crate::hamiltonian::{build_ising, diagonal, IsingHamiltonian, PenaltyWeights};
use crate::seed;
use crate::simulator::{
    build_qaoa_circuit_with_bindings, expectation_with, expectation_with_diagonal,
    run_density_matrix, run_statevector, sample_probabilities, Circuit, Confusion, NoiseModel,
    QaoaCircuit, QaoaParams, QuantumState, MAX_DENSITY_QUBITS,
};

/// Execution backend of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Exact expectation from the state vector.
    Statevector,
    /// State vector sampled with a finite shot budget.
    Shots,
    /// Noisy density matrix sampled with readout error.
    Noisy,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Statevector, Backend::Shots, Backend::Noisy];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Statevector => "statevector",
            Backend::Shots => "shots",
            Backend::Noisy => "noisy",
        }
    }

    pub fn is_exact(self) -> bool {
        self == Backend::Statevector
    }

    /// Central-difference step suited to the backend's noise floor.
    pub fn default_fd_step(self) -> f64 {
        if self.is_exact() {
            1e-5
        } else {
            0.05
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::contract(format!(
                    "unknown backend `{s}`; expected statevector, shots or noisy"
                ))
            })
    }
}

/// `F(γ, β)` for one graph, depth and backend.
///
/// Each evaluation draws fresh shots with a seed derived from the base seed
/// and a running evaluation index, so a fixed call sequence is
/// bit-reproducible.
#[derive(Debug)]
pub struct QaoaObjective {
    graph: Graph,
    weights: PenaltyWeights,
    hamiltonian: IsingHamiltonian,
    diagonal: Vec<f64>,
    depth: usize,
    backend: Backend,
    shots: u64,
    base_seed: u64,
    noise: NoiseModel,
    readout: Option<Vec<Confusion>>,
    evaluations: AtomicU64,
}

impl QaoaObjective {
    pub fn new(
        graph: Graph,
        weights: PenaltyWeights,
        depth: usize,
        backend: Backend,
        shots: u64,
        base_seed: u64,
        noise: NoiseModel,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::contract("depth must be at least 1"));
        }
        if !backend.is_exact() && shots == 0 {
            return Err(Error::contract("shot backends need at least one shot"));
        }
        let n = graph.n_vertices();
        if backend == Backend::Noisy {
            if n > MAX_DENSITY_QUBITS {
                return Err(Error::contract(format!(
                    "noisy backend limited to {MAX_DENSITY_QUBITS} qubits, got {n}"
                )));
            }
            noise.validate()?;
            noise.check_register(n)?;
        }
        let hamiltonian = build_ising(&graph, weights);
        let diagonal = diagonal(&hamiltonian)?;
        let readout = (backend == Backend::Noisy && noise.has_readout_error())
            .then(|| noise.readout_matrices(n));
        Ok(Self {
            graph,
            weights,
            hamiltonian,
            diagonal,
            depth,
            backend,
            shots,
            base_seed,
            noise,
            readout,
            evaluations: AtomicU64::new(0),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> PenaltyWeights {
        self.weights
    }

    pub fn hamiltonian(&self) -> &IsingHamiltonian {
        &self.hamiltonian
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dimension(&self) -> usize {
        2 * self.depth
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Circuit executions so far, including those spent in gradients.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Lowest eigenvalue of the cost operator.
    pub fn ground_energy(&self) -> f64 {
        self.diagonal.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn circuit(&self, flat: &[f64]) -> Result<QaoaCircuit> {
        if flat.len() != self.dimension() {
            return Err(Error::contract(format!(
                "expected {} parameters for depth {}, got {}",
                self.dimension(),
                self.depth,
                flat.len()
            )));
        }
        let params = QaoaParams::from_flat(flat)?;
        Ok(build_qaoa_circuit_with_bindings(&self.hamiltonian, &params))
    }

    /// One backend evaluation using the next evaluation index.
    pub fn evaluate(&self, flat: &[f64]) -> Result<f64> {
        let c = self.circuit(flat)?;
        let index = self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.evaluate_circuit(&c.circuit, seed::derive(self.base_seed, index))
    }

    /// One backend evaluation with an explicit sampling seed.
    pub fn evaluate_with_seed(&self, flat: &[f64], sample_seed: u64) -> Result<f64> {
        let c = self.circuit(flat)?;
        self.evaluate_circuit(&c.circuit, sample_seed)
    }

    pub fn evaluate_circuit(&self, c: &Circuit, sample_seed: u64) -> Result<f64> {
        let probs = self.run(c)?.probabilities();
        if self.backend.is_exact() {
            return Ok(expectation_with(&probs, &self.diagonal));
        }
        let counts = sample_probabilities(&probs, self.shots, self.readout.as_deref(), sample_seed)?;
        Ok(expectation_with_diagonal(&counts, &self.diagonal))
    }

    fn run(&self, c: &Circuit) -> Result<QuantumState> {
        Ok(match self.backend {
            Backend::Statevector | Backend::Shots => QuantumState::Pure(run_statevector(c)?),
            Backend::Noisy => QuantumState::Mixed(run_density_matrix(c, &self.noise)?),
        })
    }

    /// Final state of the ansatz: pure for exact and shot backends, mixed
    /// for the noisy backend.
    pub fn final_state(&self, flat: &[f64]) -> Result<QuantumState> {
        self.run(&self.circuit(flat)?.circuit)
    }

    /// Shot-free expectation of the backend's state.
    pub fn exact_expectation(&self, flat: &[f64]) -> Result<f64> {
        let probs = self.final_state(flat)?.probabilities();
        Ok(expectation_with(&probs, &self.diagonal))
    }

    /// Probability mass on optimal covers: exact on the state-vector
    /// backend, a relative frequency over the objective's shot budget
    /// (including readout error) on shot backends.
    pub fn success_probability(&self, flat: &[f64], sample_seed: u64) -> Result<f64> {
        let optimal = min_vertex_covers(&self.graph)?;
        let probs = self.final_state(flat)?.probabilities();
        if self.backend.is_exact() {
            return Ok(optimal.covers.iter().map(|z| probs[z.bits() as usize]).sum());
        }
        let counts = sample_probabilities(&probs, self.shots, self.readout.as_deref(), sample_seed)?;
        Ok(optimal.covers.iter().map(|z| counts.frequency(z.bits())).sum())
    }

    /// Scale of the sampling noise in one evaluation: half the spectral
    /// range of the cost over the square root of the shot count, 0 on the
    /// exact backend.
    pub fn noise_level(&self) -> f64 {
        if self.backend.is_exact() {
            return 0.0;
        }
        let (lo, hi) = self
            .diagonal
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        (hi - lo) / (2.0 * (self.shots as f64).sqrt())
    }

    /// Circuit executions consumed by one parameter-shift gradient.
    pub fn gradient_cost(&self) -> u64 {
        let zeros = vec![0.0; self.dimension()];
        2 * self.circuit(&zeros).expect("dimension matches").bindings.len() as u64
    }
}

/// Exact gradient by the two-point shift rule applied per gate.
///
/// Every rotation in the ansatz is `exp(-iθG/2)` with `G` having eigenvalues
/// ±1, so `∂F/∂θ_gate = [F(θ_gate + π/2) - F(θ_gate - π/2)] / 2`. A flat
/// parameter feeding several gates accumulates the per-gate terms weighted
/// by the gate's angle coefficient.
pub fn parameter_shift_grad(obj: &QaoaObjective, params: &QaoaParams) -> Result<Vec<f64>> {
    let flat = params.to_flat();
    let qc = obj.circuit(&flat)?;
    let m = qc.bindings.len() as u64;
    let first = obj.evaluations.fetch_add(2 * m, Ordering::Relaxed);
    let shift = std::f64::consts::FRAC_PI_2;

    let eval_pair = |j: usize| -> Result<(f64, f64)> {
        let b = qc.bindings[j];
        let index = first + 2 * j as u64;
        let plus = obj.evaluate_circuit(
            &qc.circuit.with_shifted_angle(b.gate, shift),
            seed::derive(obj.base_seed, index),
        )?;
        let minus = obj.evaluate_circuit(
            &qc.circuit.with_shifted_angle(b.gate, -shift),
            seed::derive(obj.base_seed, index + 1),
        )?;
        Ok((plus, minus))
    };
    let pairs: Vec<(f64, f64)> = if obj.backend == Backend::Noisy {
        (0..qc.bindings.len())
            .into_par_iter()
            .map(eval_pair)
            .collect::<Result<_>>()?
    } else {
        (0..qc.bindings.len()).map(eval_pair).collect::<Result<_>>()?
    };

    let mut grad = vec![0.0; flat.len()];
    for (b, (plus, minus)) in qc.bindings.iter().zip(pairs) {
        grad[b.param] += b.coefficient * (plus - minus) / 2.0;
    }
    Ok(grad)
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn finite_difference_grad(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::contract(format!("finite-difference step {h} must be positive")));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objective(g: Graph, depth: usize, backend: Backend) -> QaoaObjective {
        QaoaObjective::new(
            g,
            PenaltyWeights::default(),
            depth,
            backend,
            2000,
            17,
            NoiseModel::default(),
        )
        .unwrap()
    }

    #[test]
    fn beta_gradient_vanishes_at_zero_angles() {
        let obj = objective(Graph::cycle(5).unwrap(), 3, Backend::Statevector);
        let params = QaoaParams::new(vec![0.0; 3], vec![0.0; 3]).unwrap();
        let grad = parameter_shift_grad(&obj, &params).unwrap();
        assert!(grad[3..].iter().all(|g| g.abs() < 1e-10), "{grad:?}");
    }

    #[test]
    fn shift_rule_matches_finite_differences() {
        let obj = objective(Graph::complete(4).unwrap(), 2, Backend::Statevector);
        let x = [0.31, -0.72, 1.13, 0.45];
        let ps = parameter_shift_grad(&obj, &QaoaParams::from_flat(&x).unwrap()).unwrap();
        let fd = finite_difference_grad(|p| obj.evaluate(p).unwrap(), &x, 1e-5).unwrap();
        for (a, b) in ps.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-5, "{ps:?} vs {fd:?}");
        }
    }

    #[test]
    fn gradient_spends_two_runs_per_rotation() {
        let obj = objective(Graph::cycle(5).unwrap(), 2, Backend::Shots);
        let before = obj.evaluations();
        parameter_shift_grad(&obj, &QaoaParams::from_flat(&[0.1, 0.2, 0.3, 0.4]).unwrap())
            .unwrap();
        // C5: all degrees 2, so 5 RZ + 5 RZZ + 5 RX per layer.
        assert_eq!(obj.evaluations() - before, 60);
        assert_eq!(obj.gradient_cost(), 60);
    }

    #[test]
    fn finite_difference_of_simple_functions() {
        assert_eq!(finite_difference_grad(|_| 4.0, &[1.0, 2.0], 1e-3).unwrap(), [0.0, 0.0]);
        let g = finite_difference_grad(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0], 1e-5)
            .unwrap();
        assert!(g.iter().all(|v| (v - 2.0).abs() < 1e-6));
        assert!(finite_difference_grad(|_| 0.0, &[1.0], 0.0).is_err());
    }

    #[test]
    fn evaluations_are_reproducible_per_seed() {
        let x = [0.4, 0.9];
        for backend in Backend::ALL {
            let a = objective(Graph::cycle(5).unwrap(), 1, backend);
            let b = objective(Graph::cycle(5).unwrap(), 1, backend);
            let va: Vec<f64> = (0..3).map(|_| a.evaluate(&x).unwrap()).collect();
            let vb: Vec<f64> = (0..3).map(|_| b.evaluate(&x).unwrap()).collect();
            assert_eq!(va, vb);
            assert_eq!(
                a.evaluate_with_seed(&x, 5).unwrap(),
                b.evaluate_with_seed(&x, 5).unwrap()
            );
        }
    }

    #[test]
    fn objective_rejects_bad_input() {
        let obj = objective(Graph::cycle(5).unwrap(), 2, Backend::Statevector);
        assert!(obj.evaluate(&[0.1, 0.2]).is_err());
        assert!(QaoaObjective::new(
            Graph::cycle(5).unwrap(),
            PenaltyWeights::default(),
            0,
            Backend::Statevector,
            1,
            0,
            NoiseModel::ideal()
        )
        .is_err());
        assert_eq!("NOISY".parse::<Backend>().unwrap(), Backend::Noisy);
        assert!("gpu".parse::<Backend>().is_err());
    }
}
