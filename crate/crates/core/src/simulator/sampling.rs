use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::Confusion;
use super::QuantumState;
use crate::error::{Error, Result};
use crate::graph::{BitString, Graph};
use crate::hamiltonian::{classical_cost, PenaltyWeights};

/// Measurement histogram over basis indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    n_qubits: usize,
    shots: u64,
    counts: BTreeMap<u32, u64>,
}

impl ShotCounts {
    pub fn new(n_qubits: usize, counts: BTreeMap<u32, u64>) -> Result<Self> {
        if n_qubits > 32 || counts.keys().any(|&z| n_qubits < 32 && z >> n_qubits != 0) {
            return Err(Error::contract(format!(
                "outcome does not fit a {n_qubits}-qubit register"
            )));
        }
        let shots = counts.values().sum();
        Ok(Self {
            n_qubits,
            shots,
            counts,
        })
    }

    /// From textual outcomes, vertex 0 first.
    pub fn from_strings<'a>(pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        let mut n = None;
        for (s, c) in pairs {
            let z: BitString = s.parse()?;
            match n {
                None => n = Some(z.len()),
                Some(len) if len != z.len() => {
                    return Err(Error::contract("outcomes of different lengths"))
                }
                _ => {}
            }
            *counts.entry(z.bits()).or_insert(0) += c;
        }
        Self::new(n.unwrap_or(0), counts)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, z: u32) -> u64 {
        self.counts.get(&z).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (BitString, u64)> + '_ {
        self.counts.iter().map(move |(&z, &c)| {
            (
                BitString::new(z, self.n_qubits).expect("checked on construction"),
                c,
            )
        })
    }

    pub fn frequency(&self, z: u32) -> f64 {
        self.get(z) as f64 / self.shots as f64
    }
}

/// Draws `shots` computational-basis outcomes, then flips each bit
/// independently according to its readout matrix when one is given.
pub fn sample(
    state: &QuantumState,
    shots: u64,
    readout: Option<&[Confusion]>,
    seed: u64,
) -> Result<ShotCounts> {
    sample_probabilities(&state.probabilities(), shots, readout, seed)
}

pub(crate) fn sample_probabilities(
    probs: &[f64],
    shots: u64,
    readout: Option<&[Confusion]>,
    seed: u64,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::contract("need at least one shot"));
    }
    let n = probs.len().trailing_zeros() as usize;
    if let Some(r) = readout {
        if r.len() != n {
            return Err(Error::contract(format!(
                "{} readout matrices for {n} qubits",
                r.len()
            )));
        }
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * total;
        let mut z = cdf.partition_point(|&c| c <= u).min(probs.len() - 1) as u32;
        if let Some(r) = readout {
            for (q, m) in r.iter().enumerate() {
                let bit = z >> q & 1 == 1;
                if rng.gen::<f64>() < m.flip_probability(bit) {
                    z ^= 1 << q;
                }
            }
        }
        *counts.entry(z).or_insert(0) += 1;
    }
    ShotCounts::new(n, counts)
}

/// Shot-weighted mean classical cost.
pub fn expectation_from_counts(counts: &ShotCounts, g: &Graph, w: PenaltyWeights) -> Result<f64> {
    if counts.n_qubits != g.n_vertices() {
        return Err(Error::contract(format!(
            "outcomes have {} bits, graph has {} vertices",
            counts.n_qubits,
            g.n_vertices()
        )));
    }
    let mut sum = 0.0;
    for (z, c) in counts.iter() {
        sum += c as f64 * classical_cost(g, w, z)?;
    }
    Ok(sum / counts.shots as f64)
}

/// Same estimate from a precomputed cost diagonal.
pub(crate) fn expectation_with_diagonal(counts: &ShotCounts, diag: &[f64]) -> f64 {
    let sum: f64 = counts
        .counts
        .iter()
        .map(|(&z, &c)| c as f64 * diag[z as usize])
        .sum();
    sum / counts.shots as f64
}
