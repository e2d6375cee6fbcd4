//! Mixed-state simulation with per-gate depolarizing and thermal relaxation
//! channels.

use num_complex::Complex64;

use super::circuit::{Circuit, Gate};
use super::gates::{self, Matrix2};
use super::noise::NoiseModel;
use super::statevector::StateVector;
use crate::error::{Error, Result};

/// Largest register simulated as a density matrix.
pub const MAX_DENSITY_QUBITS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major `2^n × 2^n` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1 << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, data })
    }

    pub fn from_pure(state: &StateVector) -> Result<Self> {
        check_size(state.n_qubits())?;
        let a = state.amplitudes();
        let data = a
            .iter()
            .flat_map(|r| a.iter().map(move |c| r * c.conj()))
            .collect();
        Ok(Self {
            n_qubits: state.n_qubits(),
            data,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Real parts of the diagonal, clipped at zero.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re.max(0.0)).collect()
    }

    /// Largest `|ρ - ρ†|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| (self.get(r, c) - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(self.dim(), &self.data)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Maximum entrywise distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `ρ ← UρU†` for a gate of the circuit gate set.
    pub fn apply_unitary(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => self.apply_1q(q, &gates::hadamard()),
            Gate::Rx(q, theta) => self.apply_1q(q, &gates::rx(theta)),
            Gate::Rz(q, theta) => {
                let (p0, p1) = gates::rz_phases(theta);
                self.apply_diagonal(|i| if i >> q & 1 == 0 { p0 } else { p1 });
            }
            Gate::Rzz(a, b, theta) => {
                let (even, odd) = gates::rz_phases(theta);
                self.apply_diagonal(|i| if (i >> a ^ i >> b) & 1 == 0 { even } else { odd });
            }
            Gate::MeasureAll => {}
        }
    }

    fn apply_1q(&mut self, q: usize, m: &Matrix2) {
        let dim = self.dim();
        let bit = 1 << q;
        // Left multiply by U, row pairs at a time.
        for r0 in (0..dim).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c in 0..dim {
                let (a0, a1) = (self.data[r0 * dim + c], self.data[r1 * dim + c]);
                self.data[r0 * dim + c] = m[0][0] * a0 + m[0][1] * a1;
                self.data[r1 * dim + c] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        // Right multiply by U†.
        let mc = [
            [m[0][0].conj(), m[0][1].conj()],
            [m[1][0].conj(), m[1][1].conj()],
        ];
        for row in self.data.chunks_exact_mut(dim) {
            for c0 in (0..dim).filter(|c| c & bit == 0) {
                let c1 = c0 | bit;
                let (a0, a1) = (row[c0], row[c1]);
                row[c0] = a0 * mc[0][0] + a1 * mc[0][1];
                row[c1] = a0 * mc[1][0] + a1 * mc[1][1];
            }
        }
    }

    fn apply_diagonal(&mut self, phase: impl Fn(usize) -> Complex64) {
        let dim = self.dim();
        let phases: Vec<Complex64> = (0..dim).map(phase).collect();
        for (r, row) in self.data.chunks_exact_mut(dim).enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x *= phases[r] * phases[c].conj();
            }
        }
    }

    /// `ρ ← (1-p)ρ + p·Tr_T(ρ) ⊗ I/2^|T|` on one or two target qubits.
    pub fn apply_depolarizing(&mut self, qubits: &[usize], prob: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::contract(format!("depolarizing probability {prob} outside [0, 1]")));
        }
        let patterns: Vec<usize> = match *qubits {
            [q] => {
                self.check_qubit(q)?;
                vec![0, 1 << q]
            }
            [a, b] if a != b => {
                self.check_qubit(a)?;
                self.check_qubit(b)?;
                vec![0, 1 << a, 1 << b, (1 << a) | (1 << b)]
            }
            _ => {
                return Err(Error::contract(format!(
                    "depolarizing acts on one or two distinct qubits, got {qubits:?}"
                )))
            }
        };
        if prob == 0.0 {
            return Ok(());
        }
        let dim = self.dim();
        let mask = patterns.iter().fold(0, |acc, p| acc | p);
        let scale = prob / patterns.len() as f64;
        for r0 in (0..dim).filter(|r| r & mask == 0) {
            for c0 in (0..dim).filter(|c| c & mask == 0) {
                let traced: Complex64 = patterns
                    .iter()
                    .map(|&k| self.data[(r0 | k) * dim + (c0 | k)])
                    .sum();
                for &a in &patterns {
                    for &b in &patterns {
                        self.data[(r0 | a) * dim + (c0 | b)] *= 1.0 - prob;
                    }
                }
                for &k in &patterns {
                    self.data[(r0 | k) * dim + (c0 | k)] += traced * scale;
                }
            }
        }
        Ok(())
    }

    /// Amplitude damping with `γ = 1 - exp(-d/t1)` followed by pure dephasing
    /// chosen so coherences decay by `exp(-d/t2)` in total. Times share a unit.
    pub fn apply_thermal_relaxation(
        &mut self,
        qubit: usize,
        t1: f64,
        t2: f64,
        duration: f64,
    ) -> Result<()> {
        self.check_qubit(qubit)?;
        if !(t1 > 0.0 && t2 > 0.0) || t2 > 2.0 * t1 {
            return Err(Error::contract(format!(
                "thermal relaxation needs 0 < t2 <= 2*t1, got t1={t1}, t2={t2}"
            )));
        }
        if !(duration >= 0.0) {
            return Err(Error::contract(format!("negative duration {duration}")));
        }
        if duration == 0.0 {
            return Ok(());
        }
        let gamma = 1.0 - (-duration / t1).exp();
        let coherence = (-duration / t2).exp();
        let dim = self.dim();
        let bit = 1 << qubit;
        for r0 in (0..dim).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c0 in (0..dim).filter(|c| c & bit == 0) {
                let c1 = c0 | bit;
                let excited = self.data[r1 * dim + c1];
                self.data[r0 * dim + c0] += excited * gamma;
                self.data[r1 * dim + c1] = excited * (1.0 - gamma);
                self.data[r0 * dim + c1] *= coherence;
                self.data[r1 * dim + c0] *= coherence;
            }
        }
        Ok(())
    }

    /// Gate followed by its noise channels.
    pub fn apply_noisy(&mut self, gate: &Gate, noise: &NoiseModel) -> Result<()> {
        self.apply_unitary(gate);
        match *gate {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Rz(q, _) => {
                self.apply_depolarizing(&[q], noise.p1)?;
                self.relax(q, noise, noise.dur_1q_ns)?;
            }
            Gate::Rzz(a, b, _) => {
                self.apply_depolarizing(&[a, b], noise.p2)?;
                self.relax(a, noise, noise.dur_2q_ns)?;
                self.relax(b, noise, noise.dur_2q_ns)?;
            }
            Gate::MeasureAll => {}
        }
        Ok(())
    }

    fn relax(&mut self, q: usize, noise: &NoiseModel, duration_ns: f64) -> Result<()> {
        // Calibration times are in µs, durations in ns.
        self.apply_thermal_relaxation(q, noise.t1(q) * 1e3, noise.t2(q) * 1e3, duration_ns)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::contract(format!(
                "qubit {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_DENSITY_QUBITS {
        return Err(Error::contract(format!(
            "density matrix limited to {MAX_DENSITY_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Starts from `|0...0><0...0|` and applies each gate with its noise.
pub fn run_density_matrix(c: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.check_register(c.n_qubits())?;
    let mut rho = DensityMatrix::zero_state(c.n_qubits())?;
    for gate in c.gates() {
        rho.apply_noisy(gate, noise)?;
    }
    Ok(rho)
}

/// Eigenvalues of a Hermitian matrix via the real symmetric embedding
/// `[[A, -B], [B, A]]` and cyclic Jacobi rotations. Each eigenvalue of the
/// embedding appears twice.
fn hermitian_eigenvalues(dim: usize, data: &[Complex64]) -> Vec<f64> {
    let n = 2 * dim;
    let mut m = vec![0.0; n * n];
    for r in 0..dim {
        for c in 0..dim {
            // Symmetrize so small Hermiticity errors do not stall the sweep.
            let z = (data[r * dim + c] + data[c * dim + r].conj()) * 0.5;
            m[r * n + c] = z.re;
            m[(r + dim) * n + (c + dim)] = z.re;
            m[r * n + (c + dim)] = -z.im;
            m[(r + dim) * n + c] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::statevector::run_statevector;

    fn plus_state() -> DensityMatrix {
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        rho.apply_unitary(&Gate::H(0));
        rho
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed() {
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        rho.apply_depolarizing(&[0], 1.0).unwrap();
        assert!((rho.get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((rho.get(1, 1).re - 0.5).abs() < 1e-15);
        assert!(rho.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn depolarizing_one_qubit_of_a_product_state() {
        // |+>|1>, depolarize qubit 0 only: qubit 1 stays |1>.
        let mut rho = DensityMatrix::zero_state(2).unwrap();
        rho.apply_unitary(&Gate::H(0));
        rho.apply_unitary(&Gate::Rx(1, std::f64::consts::PI));
        rho.apply_depolarizing(&[0], 1.0).unwrap();
        for (i, p) in rho.probabilities().into_iter().enumerate() {
            let expect = if i & 2 != 0 { 0.5 } else { 0.0 };
            assert!((p - expect).abs() < 1e-12, "{i}: {p}");
        }
        assert!(rho.get(2, 3).norm() < 1e-12);
    }

    #[test]
    fn zero_probability_is_identity() {
        let before = plus_state();
        let mut rho = before.clone();
        rho.apply_depolarizing(&[0], 0.0).unwrap();
        assert_eq!(rho, before);
        rho.apply_thermal_relaxation(0, 10.0, 5.0, 0.0).unwrap();
        assert_eq!(rho, before);
    }

    #[test]
    fn depolarizing_composes_multiplicatively() {
        let q = 0.13;
        let mut twice = plus_state();
        twice.apply_depolarizing(&[0], q).unwrap();
        twice.apply_depolarizing(&[0], q).unwrap();
        let mut once = plus_state();
        once.apply_depolarizing(&[0], 1.0 - (1.0 - q) * (1.0 - q)).unwrap();
        assert!(twice.distance(&once) < 1e-15);
    }

    #[test]
    fn two_qubit_depolarizing_keeps_trace_and_mixes_pair() {
        let mut rho = DensityMatrix::zero_state(3).unwrap();
        rho.apply_unitary(&Gate::H(2));
        rho.apply_depolarizing(&[0, 1], 1.0).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        // Qubit 2 keeps its coherence, qubits 0 and 1 are uniform.
        assert!((rho.get(0, 4).re - 0.125).abs() < 1e-14);
        assert!((rho.get(3, 3).re - 0.125).abs() < 1e-14);
        assert!(rho.apply_depolarizing(&[1, 1], 0.5).is_err());
        assert!(rho.apply_depolarizing(&[0], 1.5).is_err());
    }

    #[test]
    fn thermal_relaxation_closed_forms() {
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        rho.apply_unitary(&Gate::Rx(0, std::f64::consts::PI));
        rho.apply_thermal_relaxation(0, 1.0, 1.0, 50.0).unwrap();
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-6);
        assert!(rho.get(1, 1).re.abs() < 1e-6);

        for (t1, t2, d) in [(100.0, 100.0, 35.0), (50.0, 80.0, 300.0), (10.0, 20.0, 7.0)] {
            let mut rho = plus_state();
            rho.apply_thermal_relaxation(0, t1, t2, d).unwrap();
            let expect = 0.5 * (-d / t2).exp();
            assert!((rho.get(0, 1).norm() - expect).abs() < 1e-9);
            let pop1 = 0.5 * (-d / t1).exp();
            assert!((rho.get(1, 1).re - pop1).abs() < 1e-12);
        }
        let mut rho = plus_state();
        assert!(rho.apply_thermal_relaxation(0, 10.0, 25.0, 1.0).is_err());
        assert!(rho.apply_thermal_relaxation(0, 10.0, 5.0, -1.0).is_err());
    }

    #[test]
    fn noiseless_run_matches_pure_state() {
        let c = Circuit::new(
            3,
            vec![
                Gate::H(0),
                Gate::H(1),
                Gate::H(2),
                Gate::Rz(1, 0.4),
                Gate::Rzz(0, 2, 1.1),
                Gate::Rx(2, -0.3),
                Gate::Rx(0, 2.2),
            ],
        )
        .unwrap();
        let rho = run_density_matrix(&c, &NoiseModel::ideal()).unwrap();
        let pure = DensityMatrix::from_pure(&run_statevector(&c).unwrap()).unwrap();
        assert!(rho.distance(&pure) < 1e-12);
    }

    #[test]
    fn eigenvalues_of_known_states() {
        let rho = plus_state();
        let eig = hermitian_eigenvalues(2, &rho.data);
        assert!((eig[0]).abs() < 1e-12 && (eig[1] - 1.0).abs() < 1e-12);

        let mut mixed = DensityMatrix::zero_state(2).unwrap();
        mixed.apply_unitary(&Gate::Rx(0, 0.9));
        mixed.apply_unitary(&Gate::H(1));
        mixed.apply_depolarizing(&[0, 1], 0.4).unwrap();
        let eig = hermitian_eigenvalues(4, &mixed.data);
        let sum: f64 = eig.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // Pure state depolarized with p on 2 qubits: 1-p+p/4 once, p/4 thrice.
        assert!((eig[3] - 0.7).abs() < 1e-12);
        assert!(eig[..3].iter().all(|e| (e - 0.1).abs() < 1e-12));
    }

    #[test]
    fn size_limit() {
        assert!(DensityMatrix::zero_state(11).is_err());
    }
}
