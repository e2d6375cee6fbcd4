use std::collections::VecDeque;

use super::line_search::strong_wolfe;
use super::{axpy, dot, norm_inf, Evaluator, OptimizerConfig, Step};

/// Search-direction model shared by BFGS and L-BFGS.
trait InverseHessian {
    /// `-H·g`.
    fn direction(&self, g: &[f64]) -> Vec<f64>;
    /// Update with step `s` and gradient change `y`, `s·y > 0`.
    fn update(&mut self, s: &[f64], y: &[f64]);
    fn reset(&mut self);
}

struct Dense {
    n: usize,
    h: Vec<f64>,
    fresh: bool,
}

impl Dense {
    fn new(n: usize) -> Self {
        let mut d = Self {
            n,
            h: vec![0.0; n * n],
            fresh: true,
        };
        d.reset();
        d
    }
}

impl InverseHessian for Dense {
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| -dot(&self.h[i * self.n..(i + 1) * self.n], g))
            .collect()
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        let n = self.n;
        let sy = dot(s, y);
        if self.fresh {
            // Scale the identity by the observed curvature before the first update.
            let scale = sy / dot(y, y);
            for i in 0..n {
                self.h[i * n + i] = scale;
            }
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        let hy: Vec<f64> = (0..n).map(|i| dot(&self.h[i * n..(i + 1) * n], y)).collect();
        let yhy = dot(y, &hy);
        // H ← H - ρ(Hy sᵀ + s yᵀH) + (ρ² yᵀHy + ρ) s sᵀ
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                    + (rho * rho * yhy + rho) * s[i] * s[j];
            }
        }
    }

    fn reset(&mut self) {
        self.h.fill(0.0);
        for i in 0..self.n {
            self.h[i * self.n + i] = 1.0;
        }
        self.fresh = true;
    }
}

struct Limited {
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl InverseHessian for Limited {
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q = axpy(&q, -a, y);
            alphas.push(a);
        }
        let gamma = self
            .pairs
            .back()
            .map_or(1.0, |(s, y, _)| dot(s, y) / dot(y, y));
        let mut r: Vec<f64> = q.iter().map(|v| gamma * v).collect();
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &r);
            r = axpy(&r, a - b, s);
        }
        r.iter().map(|v| -v).collect()
    }

    fn update(&mut self, s: &[f64], y: &[f64]) {
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s.to_vec(), y.to_vec(), 1.0 / dot(s, y)));
    }

    fn reset(&mut self) {
        self.pairs.clear();
    }
}

pub(super) fn run_bfgs(ev: &mut Evaluator, x0: &[f64], cfg: &OptimizerConfig) -> Step<()> {
    let hp = cfg.hyper.bfgs.clone();
    descend(ev, x0, cfg, hp.c1, hp.c2, hp.grad_tol, Dense::new(x0.len()))
}

pub(super) fn run_lbfgs(ev: &mut Evaluator, x0: &[f64], cfg: &OptimizerConfig) -> Step<()> {
    let hp = cfg.hyper.lbfgs.clone();
    let model = Limited {
        memory: hp.memory.max(1),
        pairs: VecDeque::new(),
    };
    descend(ev, x0, cfg, hp.c1, hp.c2, hp.grad_tol, model)
}

fn descend(
    ev: &mut Evaluator,
    x0: &[f64],
    cfg: &OptimizerConfig,
    c1: f64,
    c2: f64,
    grad_tol: f64,
    mut model: impl InverseHessian,
) -> Step<()> {
    let grad_tol = cfg.tolerance(grad_tol);
    let mut x = x0.to_vec();
    let mut fx = ev.value(&x)?;
    let mut g = ev.gradient(&x)?;
    let mut fresh = true;
    loop {
        if norm_inf(&g) < grad_tol {
            if !cfg.is_noisy() {
                return Ok(());
            }
            model.reset();
            fresh = true;
            x = ev.best().0.to_vec();
            fx = ev.value(&x)?;
            g = ev.gradient(&x)?;
            continue;
        }
        let mut d = model.direction(&g);
        if dot(&d, &g) >= 0.0 {
            model.reset();
            fresh = true;
            d = g.iter().map(|v| -v).collect();
        }
        let t0 = if fresh { 1.0 / norm_inf(&g).max(1.0) } else { 1.0 };
        let Some((t, ft, g_new)) = strong_wolfe(ev, &x, fx, &g, &d, c1, c2, t0)? else {
            if fresh && !cfg.is_noisy() {
                // Steepest descent already failed: nothing left to gain.
                return Ok(());
            }
            model.reset();
            fresh = true;
            if cfg.is_noisy() {
                x = ev.best().0.to_vec();
                fx = ev.value(&x)?;
                g = ev.gradient(&x)?;
            }
            continue;
        };
        let s: Vec<f64> = d.iter().map(|v| t * v).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        x = axpy(&x, 1.0, &s);
        fx = ft;
        g = g_new;
        // Skip the update when the curvature condition fails.
        if dot(&s, &y) > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            model.update(&s, &y);
            fresh = false;
        }
    }
}
