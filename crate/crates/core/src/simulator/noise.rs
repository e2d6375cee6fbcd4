//! Gate-level noise parameters and the calibration file that carries them.
//!
//! A calibration file is TOML with exactly these keys:
//!
//! ```toml
//! p1 = 5e-4          # single-qubit depolarizing probability per gate
//! p2 = 1e-2          # two-qubit depolarizing probability per gate
//! t1_us = 100.0      # relaxation time, scalar or per-qubit array
//! t2_us = 100.0      # dephasing time, scalar or per-qubit array, t2 <= 2*t1
//! dur_1q_ns = 35.0
//! dur_2q_ns = 300.0
//! readout_p01 = 0.025  # P(read 1 | prepared 0), scalar or per-qubit array
//! readout_p10 = 0.025  # P(read 0 | prepared 1), scalar or per-qubit array
//! ```
//!
//! `inf` is accepted for `t1_us` and `t2_us`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-stochastic readout matrix
/// `[[P(0|0), P(1|0)], [P(0|1), P(1|1)]]`, rows indexed by the true bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion(pub [[f64; 2]; 2]);

impl Confusion {
    pub fn ideal() -> Self {
        Self([[1.0, 0.0], [0.0, 1.0]])
    }

    /// From the two flip probabilities.
    pub fn from_flips(p01: f64, p10: f64) -> Self {
        Self([[1.0 - p01, p01], [p10, 1.0 - p10]])
    }

    /// Probability that a true `bit` is read as the opposite value.
    pub fn flip_probability(&self, bit: bool) -> f64 {
        if bit {
            self.0[1][0]
        } else {
            self.0[0][1]
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        for row in &self.0 {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::field(field, "probabilities must lie in [0, 1]"));
            }
            if (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return Err(Error::field(field, "confusion matrix rows must sum to 1"));
            }
        }
        Ok(())
    }
}

/// A value shared by every qubit or listed per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerQubit<T> {
    Uniform(T),
    Each(Vec<T>),
}

impl<T: Copy> PerQubit<T> {
    pub fn get(&self, q: usize) -> Option<T> {
        match self {
            PerQubit::Uniform(v) => Some(*v),
            PerQubit::Each(vs) => vs.get(q).copied(),
        }
    }

    fn values(&self) -> Vec<T> {
        match self {
            PerQubit::Uniform(v) => vec![*v],
            PerQubit::Each(vs) => vs.clone(),
        }
    }

    fn covers(&self, n_qubits: usize) -> bool {
        match self {
            PerQubit::Uniform(_) => true,
            PerQubit::Each(vs) => vs.len() >= n_qubits,
        }
    }
}

/// Depolarizing, thermal relaxation and readout parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    /// Microseconds.
    pub t1_us: PerQubit<f64>,
    /// Microseconds.
    pub t2_us: PerQubit<f64>,
    /// Nanoseconds.
    pub dur_1q_ns: f64,
    /// Nanoseconds.
    pub dur_2q_ns: f64,
    pub readout: PerQubit<Confusion>,
}

impl Default for NoiseModel {
    /// Representative superconducting-device values.
    fn default() -> Self {
        Self {
            p1: 5e-4,
            p2: 1e-2,
            t1_us: PerQubit::Uniform(100.0),
            t2_us: PerQubit::Uniform(100.0),
            dur_1q_ns: 35.0,
            dur_2q_ns: 300.0,
            readout: PerQubit::Uniform(Confusion::from_flips(2.5e-2, 2.5e-2)),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrationFile {
    p1: f64,
    p2: f64,
    t1_us: PerQubit<f64>,
    t2_us: PerQubit<f64>,
    dur_1q_ns: f64,
    dur_2q_ns: f64,
    readout_p01: PerQubit<f64>,
    readout_p10: PerQubit<f64>,
}

impl NoiseModel {
    /// Every channel is the identity.
    pub fn ideal() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            t1_us: PerQubit::Uniform(f64::INFINITY),
            t2_us: PerQubit::Uniform(f64::INFINITY),
            dur_1q_ns: 0.0,
            dur_2q_ns: 0.0,
            readout: PerQubit::Uniform(Confusion::ideal()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::field(field, format!("{p} is not a probability")));
            }
        }
        for (field, d) in [("dur_1q_ns", self.dur_1q_ns), ("dur_2q_ns", self.dur_2q_ns)] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::field(field, format!("duration {d} must be finite and >= 0")));
            }
        }
        let t1 = self.t1_us.values();
        let t2 = self.t2_us.values();
        for (field, ts) in [("t1_us", &t1), ("t2_us", &t2)] {
            if let Some(t) = ts.iter().find(|t| !(**t > 0.0)) {
                return Err(Error::field(field, format!("time {t} must be positive")));
            }
        }
        let n = t1.len().max(t2.len());
        for q in 0..n {
            let (a, b) = (self.t1_us.get(q), self.t2_us.get(q));
            if let (Some(t1), Some(t2)) = (a, b) {
                if t2 > 2.0 * t1 {
                    return Err(Error::field(
                        "t2_us",
                        format!("qubit {q}: t2 = {t2} exceeds 2*t1 = {}", 2.0 * t1),
                    ));
                }
            } else {
                return Err(Error::field("t2_us", "t1_us and t2_us arrays differ in length"));
            }
        }
        for c in self.readout.values() {
            c.validate("readout")?;
        }
        Ok(())
    }

    /// Checks that per-qubit arrays cover an `n_qubits` register.
    pub fn check_register(&self, n_qubits: usize) -> Result<()> {
        for (field, ok) in [
            ("t1_us", self.t1_us.covers(n_qubits)),
            ("t2_us", self.t2_us.covers(n_qubits)),
            ("readout", self.readout.covers(n_qubits)),
        ] {
            if !ok {
                return Err(Error::field(
                    field,
                    format!("per-qubit array shorter than the {n_qubits}-qubit register"),
                ));
            }
        }
        Ok(())
    }

    pub fn t1(&self, q: usize) -> f64 {
        self.t1_us.get(q).expect("register checked")
    }

    pub fn t2(&self, q: usize) -> f64 {
        self.t2_us.get(q).expect("register checked")
    }

    /// Readout matrices for the first `n_qubits` qubits.
    pub fn readout_matrices(&self, n_qubits: usize) -> Vec<Confusion> {
        (0..n_qubits)
            .map(|q| self.readout.get(q).expect("register checked"))
            .collect()
    }

    pub fn has_readout_error(&self) -> bool {
        self.readout.values().iter().any(|c| *c != Confusion::ideal())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: CalibrationFile = toml::from_str(text)?;
        let flips = |field: &str, p: &PerQubit<f64>| -> Result<Vec<f64>> {
            let vs = p.values();
            if let Some(v) = vs.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::field(field, format!("{v} is not a probability")));
            }
            Ok(vs)
        };
        let p01 = flips("readout_p01", &raw.readout_p01)?;
        let p10 = flips("readout_p10", &raw.readout_p10)?;
        let readout = match (&raw.readout_p01, &raw.readout_p10) {
            (PerQubit::Uniform(a), PerQubit::Uniform(b)) => {
                PerQubit::Uniform(Confusion::from_flips(*a, *b))
            }
            _ => {
                let n = p01.len().max(p10.len());
                let pick = |vs: &[f64], q: usize| if vs.len() == 1 { Some(vs[0]) } else { vs.get(q).copied() };
                let mut each = Vec::with_capacity(n);
                for q in 0..n {
                    match (pick(&p01, q), pick(&p10, q)) {
                        (Some(a), Some(b)) => each.push(Confusion::from_flips(a, b)),
                        _ => {
                            return Err(Error::field(
                                "readout_p10",
                                "readout_p01 and readout_p10 arrays differ in length",
                            ))
                        }
                    }
                }
                PerQubit::Each(each)
            }
        };
        let model = Self {
            p1: raw.p1,
            p2: raw.p2,
            t1_us: raw.t1_us,
            t2_us: raw.t2_us,
            dur_1q_ns: raw.dur_1q_ns,
            dur_2q_ns: raw.dur_2q_ns,
            readout,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}
