use super::{norm_inf, Evaluator, OptimizerConfig, Step};

/// ADAM with bias-corrected moments. With `amsgrad` the step uses the
/// running maximum of the corrected second moment.
pub(super) fn run(ev: &mut Evaluator, x0: &[f64], cfg: &OptimizerConfig, amsgrad: bool) -> Step<()> {
    let hp = if amsgrad {
        &cfg.hyper.amsgrad
    } else {
        &cfg.hyper.adam
    };
    let grad_tol = cfg.tolerance(1e-12);
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut v_max = vec![0.0f64; n];
    let mut t = 0i32;
    loop {
        ev.value(&x)?;
        let g = ev.gradient(&x)?;
        if norm_inf(&g) < grad_tol {
            if !cfg.is_noisy() {
                return Ok(());
            }
            // Flat within noise: restart the moments from the incumbent.
            x = ev.best().0.to_vec();
            m.fill(0.0);
            v.fill(0.0);
            v_max.fill(0.0);
            t = 0;
            continue;
        }
        t += 1;
        let c1 = 1.0 - hp.beta1.powi(t);
        let c2 = 1.0 - hp.beta2.powi(t);
        for i in 0..n {
            m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
            v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
            let mut v_hat = v[i] / c2;
            if amsgrad {
                v_max[i] = v_max[i].max(v_hat);
                v_hat = v_max[i];
            }
            x[i] -= hp.learning_rate * (m[i] / c1) / (v_hat.sqrt() + hp.epsilon);
        }
    }
}
