//! One-dimensional searches along a direction `d` from a point `x`.

use super::{axpy, dot, Evaluator, Step};

const GOLDEN: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105;

/// Exact-ish minimization of `f(x + t·d)` by bracketing followed by Brent's
/// parabolic interpolation. Returns `(t, f)` at the minimum found.
pub(super) fn brent(
    ev: &mut Evaluator,
    x: &[f64],
    fx: f64,
    d: &[f64],
    tol: f64,
) -> Step<(f64, f64)> {
    let phi = |t: f64, ev: &mut Evaluator| ev.value(&axpy(x, t, d));

    // Bracket: find a < b < c (or reversed) with f(b) below both ends.
    let (mut a, mut fa) = (0.0, fx);
    let (mut b, mut fb) = (1.0, phi(1.0, ev)?);
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLDEN * (b - a);
    let mut fc = phi(c, ev)?;
    let mut expansions = 0;
    while fb > fc && expansions < 50 {
        expansions += 1;
        let r = (b - a) * (fb - fc);
        let q = (b - c) * (fb - fa);
        let denom = 2.0 * (q - r).abs().max(1e-20) * (q - r).signum();
        let mut u = b - ((b - c) * q - (b - a) * r) / denom;
        let ulim = b + 100.0 * (c - b);
        let fu;
        if (b - u) * (u - c) > 0.0 {
            let fu_in = phi(u, ev)?;
            if fu_in < fc {
                a = b;
                fa = fb;
                b = u;
                fb = fu_in;
                break;
            } else if fu_in > fb {
                c = u;
                fc = fu_in;
                break;
            }
            u = c + GOLDEN * (c - b);
            fu = phi(u, ev)?;
        } else if (c - u) * (u - ulim) > 0.0 {
            fu = phi(u, ev)?;
        } else {
            u = c + GOLDEN * (c - b);
            fu = phi(u, ev)?;
        }
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = u;
        fc = fu;
    }
    if fb > fc {
        return Ok(if fc < fa { (c, fc) } else { (a, fa) });
    }

    // Brent on [min(a,c), max(a,c)] starting from b.
    let (mut lo, mut hi) = (a.min(c), a.max(c));
    let (mut xm, mut w, mut v) = (b, b, b);
    let (mut fxm, mut fw, mut fv) = (fb, fb, fb);
    let mut e: f64 = 0.0;
    let mut step: f64 = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let tol1 = tol * xm.abs() + 1e-10;
        let tol2 = 2.0 * tol1;
        if (xm - mid).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (xm - w) * (fxm - fv);
            let mut q = (xm - v) * (fxm - fw);
            let mut p = (xm - v) * q - (xm - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = step;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (lo - xm) && p < q * (hi - xm) {
                step = p / q;
                let u = xm + step;
                if u - lo < tol2 || hi - u < tol2 {
                    step = tol1.copysign(mid - xm);
                }
                golden = false;
            }
        }
        if golden {
            e = if xm >= mid { lo - xm } else { hi - xm };
            step = CGOLD * e;
        }
        let u = if step.abs() >= tol1 {
            xm + step
        } else {
            xm + tol1.copysign(step)
        };
        let fu = phi(u, ev)?;
        if fu <= fxm {
            if u >= xm {
                lo = xm;
            } else {
                hi = xm;
            }
            v = w;
            fv = fw;
            w = xm;
            fw = fxm;
            xm = u;
            fxm = fu;
        } else {
            if u < xm {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == xm {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == xm || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((xm, fxm))
}

/// Halves the step from `t0` until the Armijo condition holds.
/// `None` when no acceptable step was found.
pub(super) fn backtracking(
    ev: &mut Evaluator,
    x: &[f64],
    fx: f64,
    g: &[f64],
    d: &[f64],
    c1: f64,
    t0: f64,
) -> Step<Option<(f64, f64)>> {
    let slope = dot(g, d);
    let mut t = t0;
    for _ in 0..40 {
        let ft = ev.value(&axpy(x, t, d))?;
        if ft <= fx + c1 * t * slope {
            return Ok(Some((t, ft)));
        }
        t *= 0.5;
    }
    Ok(None)
}

/// Accepted step of a strong-Wolfe search: `(t, f(x+td), ∇f(x+td))`.
pub(super) type WolfePoint = (f64, f64, Vec<f64>);

/// Strong-Wolfe line search by bracketing and zoom with safeguarded
/// quadratic interpolation. Gradients are requested only for trial points
/// that already satisfy sufficient decrease.
#[allow(clippy::too_many_arguments)]
pub(super) fn strong_wolfe(
    ev: &mut Evaluator,
    x: &[f64],
    fx: f64,
    g: &[f64],
    d: &[f64],
    c1: f64,
    c2: f64,
    t0: f64,
) -> Step<Option<WolfePoint>> {
    let slope0 = dot(g, d);
    if slope0 >= 0.0 {
        return Ok(None);
    }
    let (mut t_prev, mut f_prev, mut s_prev) = (0.0, fx, slope0);
    let mut t = t0;
    for i in 0..25 {
        let xt = axpy(x, t, d);
        let ft = ev.value(&xt)?;
        if ft > fx + c1 * t * slope0 || (i > 0 && ft >= f_prev) {
            return zoom(ev, x, fx, slope0, d, c1, c2, (t_prev, f_prev, s_prev), (t, ft));
        }
        let gt = ev.gradient(&xt)?;
        let st = dot(&gt, d);
        if st.abs() <= -c2 * slope0 {
            return Ok(Some((t, ft, gt)));
        }
        if st >= 0.0 {
            return zoom(ev, x, fx, slope0, d, c1, c2, (t, ft, st), (t_prev, f_prev));
        }
        (t_prev, f_prev, s_prev) = (t, ft, st);
        t *= 2.0;
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn zoom(
    ev: &mut Evaluator,
    x: &[f64],
    fx: f64,
    slope0: f64,
    d: &[f64],
    c1: f64,
    c2: f64,
    lo: (f64, f64, f64),
    hi: (f64, f64),
) -> Step<Option<WolfePoint>> {
    let (mut t_lo, mut f_lo, mut s_lo) = lo;
    let (mut t_hi, mut f_hi) = hi;
    for _ in 0..30 {
        let width = t_hi - t_lo;
        // Minimizer of the quadratic through (t_lo, f_lo, s_lo) and (t_hi, f_hi).
        let denom = 2.0 * (f_hi - f_lo - s_lo * width);
        let mut t = if denom.abs() > 1e-300 {
            t_lo - s_lo * width * width / denom
        } else {
            f64::NAN
        };
        let (a, b) = (t_lo.min(t_hi), t_lo.max(t_hi));
        let margin = 0.1 * (b - a);
        if !(t > a + margin && t < b - margin) {
            t = 0.5 * (t_lo + t_hi);
        }
        if (b - a).abs() < 1e-14 * (1.0 + b.abs()) {
            return Ok(None);
        }
        let xt = axpy(x, t, d);
        let ft = ev.value(&xt)?;
        if ft > fx + c1 * t * slope0 || ft >= f_lo {
            t_hi = t;
            f_hi = ft;
            continue;
        }
        let gt = ev.gradient(&xt)?;
        let st = dot(&gt, d);
        if st.abs() <= -c2 * slope0 {
            return Ok(Some((t, ft, gt)));
        }
        if st * (t_hi - t_lo) >= 0.0 {
            t_hi = t_lo;
            f_hi = f_lo;
        }
        t_lo = t;
        f_lo = ft;
        s_lo = st;
    }
    Ok(None)
}
