use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Evaluator, OptimizerConfig, Step};
use crate::error::{Error, Result};

fn rademacher(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Two-evaluation simultaneous-perturbation gradient estimate with a ±1
/// perturbation drawn from `seed`.
pub fn spsa_gradient_estimate(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    c_k: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(c_k > 0.0) {
        return Err(Error::contract(format!("perturbation size {c_k} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = rademacher(&mut rng, x.len());
    let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + c_k * d).collect();
    let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - c_k * d).collect();
    let diff = (f(&plus) - f(&minus)) / (2.0 * c_k);
    Ok(delta.iter().map(|d| diff * d).collect())
}

/// Gains `a_k = a/(k+1+A)^α`, `c_k = c/(k+1)^γ`.
///
/// The perturbed points only feed the gradient estimate. Incumbent
/// candidates are the iterate itself, evaluated at the start, every
/// `center_every` iterations and at the end.
pub(super) fn run(ev: &mut Evaluator, x0: &[f64], cfg: &OptimizerConfig) -> Step<()> {
    let hp = &cfg.hyper.spsa;
    let every = hp.center_every.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = x0.to_vec();
    ev.value(&x)?;
    // Solve 2k + floor((k-1)/every) + 1 <= remaining for the iteration count.
    let remaining = ev.remaining();
    let mut iterations = remaining.saturating_sub(1) / 2;
    while iterations > 0 && 2 * iterations + (iterations - 1) / every + 1 > remaining {
        iterations -= 1;
    }
    let stability = hp.stability_fraction * iterations as f64;
    for k in 0..iterations {
        if k > 0 && k % every == 0 {
            ev.value(&x)?;
        }
        let a_k = hp.a / (k as f64 + 1.0 + stability).powf(hp.alpha);
        let c_k = hp.c / (k as f64 + 1.0).powf(hp.gamma);
        let delta = rademacher(&mut rng, x.len());
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + c_k * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - c_k * d).collect();
        let diff = (ev.probe(&plus)? - ev.probe(&minus)?) / (2.0 * c_k);
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= a_k * diff * d;
        }
    }
    ev.value(&x)?;
    Ok(())
}
