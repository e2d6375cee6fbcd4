use super::{Evaluator, OptimizerConfig, Step};

fn simplex_around(ev: &mut Evaluator, center: &[f64], step: f64) -> Step<Vec<(Vec<f64>, f64)>> {
    let mut simplex = Vec::with_capacity(center.len() + 1);
    simplex.push((center.to_vec(), ev.value(center)?));
    for i in 0..center.len() {
        let mut p = center.to_vec();
        p[i] += step;
        let fp = ev.value(&p)?;
        simplex.push((p, fp));
    }
    Ok(simplex)
}

/// Downhill simplex. Terminates when the spread of simplex values falls
/// below the tolerance and the simplex has collapsed; on noisy objectives it rebuilds the simplex around
/// the incumbent instead.
pub(super) fn run(ev: &mut Evaluator, x0: &[f64], cfg: &OptimizerConfig) -> Step<()> {
    let hp = &cfg.hyper.nelder_mead;
    let tol = cfg.tolerance(hp.value_tol);
    let point_tol = if cfg.is_noisy() { f64::INFINITY } else { hp.point_tol };
    let n = x0.len();
    let mut simplex = simplex_around(ev, x0, hp.initial_step)?;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        // Equal values at distinct points (a symmetric straddle) are not convergence.
        if simplex[n].1 - simplex[0].1 < tol && diameter < point_tol {
            if !cfg.is_noisy() {
                return Ok(());
            }
            let best = ev.best().0.to_vec();
            simplex = simplex_around(ev, &best, hp.initial_step)?;
            continue;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(p, _)| p[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(hp.reflection);
        let fr = ev.value(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(hp.reflection * hp.expansion);
            let fe = ev.value(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        // Outside contraction when the reflection beat the worst point,
        // inside contraction otherwise.
        let (xc, fc) = if fr < worst.1 {
            let xc = along(hp.reflection * hp.contraction);
            let fc = ev.value(&xc)?;
            (xc, fc)
        } else {
            let xc = along(-hp.contraction);
            let fc = ev.value(&xc)?;
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let p: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + hp.shrink * (v - b))
                .collect();
            let fp = ev.value(&p)?;
            *vertex = (p, fp);
        }
    }
}
