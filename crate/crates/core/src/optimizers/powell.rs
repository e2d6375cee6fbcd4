use super::line_search::brent;
use super::{axpy, Evaluator, OptimizerConfig, Step};

fn axes(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Direction-set method: line minimization along each direction, then the
/// net displacement of the sweep replaces the direction of largest decrease
/// when the extrapolation test favors it.
pub(super) fn run(ev: &mut Evaluator, x0: &[f64], cfg: &OptimizerConfig) -> Step<()> {
    let hp = &cfg.hyper.powell;
    let tol = cfg.tolerance(hp.value_tol);
    let n = x0.len();
    let mut dirs = axes(n);
    let mut x = x0.to_vec();
    let mut fx = ev.value(&x)?;
    let mut sweeps = 0;
    loop {
        if sweeps > 0 && sweeps % n == 0 {
            dirs = axes(n);
        }
        sweeps += 1;
        let (start, f_start) = (x.clone(), fx);
        let (mut biggest, mut biggest_drop) = (0, 0.0);
        for (i, d) in dirs.iter().enumerate() {
            let before = fx;
            let (t, ft) = brent(ev, &x, fx, d, hp.line_tol)?;
            if ft < fx {
                x = axpy(&x, t, d);
                fx = ft;
            }
            if before - fx > biggest_drop {
                biggest_drop = before - fx;
                biggest = i;
            }
        }
        if 2.0 * (f_start - fx) <= tol * (f_start.abs() + fx.abs()) + 1e-25 {
            if !cfg.is_noisy() {
                return Ok(());
            }
            dirs = axes(n);
            x = ev.best().0.to_vec();
            fx = ev.best().1;
            continue;
        }
        let shift: Vec<f64> = x.iter().zip(&start).map(|(a, b)| a - b).collect();
        let extrapolated = axpy(&x, 1.0, &shift);
        let f_ext = ev.value(&extrapolated)?;
        if f_ext < f_start {
            let t = 2.0 * (f_start - 2.0 * fx + f_ext) * (f_start - fx - biggest_drop).powi(2)
                - biggest_drop * (f_start - f_ext).powi(2);
            if t < 0.0 {
                let (s, fs) = brent(ev, &x, fx, &shift, hp.line_tol)?;
                if fs < fx {
                    x = axpy(&x, s, &shift);
                    fx = fs;
                }
                dirs[biggest] = dirs[n - 1].clone();
                dirs[n - 1] = shift;
            }
        }
    }
}
