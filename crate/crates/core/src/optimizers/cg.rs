use super::line_search::backtracking;
use super::{axpy, dot, norm_inf, Evaluator, OptimizerConfig, Step};

/// Nonlinear conjugate gradient, Polak-Ribière+ with Armijo backtracking.
/// Falls back to steepest descent whenever the direction is not a descent
/// direction or the line search fails.
pub(super) fn run(ev: &mut Evaluator, x0: &[f64], cfg: &OptimizerConfig) -> Step<()> {
    let hp = &cfg.hyper.cg;
    let grad_tol = cfg.tolerance(hp.grad_tol);
    let mut x = x0.to_vec();
    let mut fx = ev.value(&x)?;
    let mut g = ev.gradient(&x)?;
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut t_init = 1.0 / norm_inf(&g).max(1.0);
    loop {
        if norm_inf(&g) < grad_tol {
            if !cfg.is_noisy() {
                return Ok(());
            }
            x = ev.best().0.to_vec();
            fx = ev.value(&x)?;
            g = ev.gradient(&x)?;
            d = g.iter().map(|v| -v).collect();
            continue;
        }
        let mut steepest = false;
        if dot(&g, &d) >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            steepest = true;
        }
        let accepted = match backtracking(ev, &x, fx, &g, &d, hp.armijo, t_init)? {
            None if !steepest => {
                d = g.iter().map(|v| -v).collect();
                backtracking(ev, &x, fx, &g, &d, hp.armijo, 1.0 / norm_inf(&g).max(1.0))?
            }
            other => other,
        };
        let Some((t, ft)) = accepted else {
            if !cfg.is_noisy() {
                return Ok(());
            }
            // Noise defeated the search; resample at the incumbent.
            x = ev.best().0.to_vec();
            fx = ev.value(&x)?;
            g = ev.gradient(&x)?;
            d = g.iter().map(|v| -v).collect();
            continue;
        };
        x = axpy(&x, t, &d);
        fx = ft;
        let g_new = ev.gradient(&x)?;
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let beta = (dot(&g_new, &y) / dot(&g, &g)).max(0.0);
        d = g_new.iter().zip(&d).map(|(gn, di)| -gn + beta * di).collect();
        g = g_new;
        // Grow the trial step so backtracking can also lengthen it.
        t_init = (2.0 * t).min(1e3);
    }
}
