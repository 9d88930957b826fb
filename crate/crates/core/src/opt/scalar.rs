use super::{Engine, SolveReport};
use crate::error::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const EXPANSION: f64 = 3.0;
const MAX_REFINE: usize = 500;

/// Minimizes a convex function of one variable.
///
/// Starting from `bracket`, the interval is grown geometrically (factor 3,
/// at most `max_expand` times) until its midpoint-side triple encloses a
/// minimum, then refined by golden-section search with parabolic steps
/// (Brent). The certificate is the final bracket width. A function that is
/// flat on the enclosing triple is constant there and the midpoint is
/// returned with certificate 0.
pub fn minimize_scalar_convex<F>(
    mut f: F,
    bracket: (f64, f64),
    tol: f64,
    max_expand: usize,
) -> Result<(f64, SolveReport)>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut c) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let mut b = 0.5 * (a + c);
    let (mut fa, mut fb, mut fc) = (f(a), f(b), f(c));
    let mut evals = 3;
    let mut expansions = 0;
    while !(fb <= fa && fb <= fc) {
        if expansions == max_expand || !(fa.is_finite() && fb.is_finite() && fc.is_finite()) {
            return Err(Error::BracketFailure { expansions });
        }
        expansions += 1;
        if fa < fc {
            // Minimum lies left of b.
            let step = EXPANSION * (b - a);
            (c, fc) = (b, fb);
            (b, fb) = (a, fa);
            a = b - step;
            fa = f(a);
        } else {
            let step = EXPANSION * (c - b);
            (a, fa) = (b, fb);
            (b, fb) = (c, fc);
            c = b + step;
            fc = f(c);
        }
        evals += 1;
    }

    let flat_scale = f64::EPSILON * fb.abs().max(1.0);
    if (fa - fb).abs() <= flat_scale && (fc - fb).abs() <= flat_scale {
        let t = 0.5 * (a + c);
        return Ok((
            t,
            SolveReport {
                engine: Engine::ScalarSearch,
                iterations: evals,
                objective: f(t),
                certificate: 0.0,
                converged: true,
                tolerance_used: tol,
            },
        ));
    }

    let (t, ft, width, iters) = brent(&mut f, a, b, c, fb, tol);
    Ok((
        t,
        SolveReport {
            engine: Engine::ScalarSearch,
            iterations: evals + iters,
            objective: ft,
            certificate: width,
            converged: width <= tol,
            tolerance_used: tol,
        },
    ))
}

/// Brent's localmin on `[lo, hi]` with interior point `x` (value `fx`).
/// Returns the best point, its value, the final bracket width and the
/// number of evaluations.
fn brent<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut lo: f64,
    x0: f64,
    mut hi: f64,
    fx0: f64,
    tol: f64,
) -> (f64, f64, f64, usize) {
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (fx0, fx0, fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut evals = 0;
    for _ in 0..MAX_REFINE {
        let mid = 0.5 * (lo + hi);
        let tol1 = 0.25 * tol + f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        if hi - lo <= tol {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // Parabola through x, w, v.
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (lo - x) && p < q * (hi - x) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { hi - x } else { lo - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u < x {
                hi = x;
            } else {
                lo = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    (x, fx, hi - lo, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_outside_initial_bracket() {
        let (t, rep) =
            minimize_scalar_convex(|t| (t - 3.0).powi(2), (-1.0, 1.0), 1e-10, 40).unwrap();
        assert!((t - 3.0).abs() < 1e-9, "t = {t}");
        assert!(rep.converged);
        assert!(rep.certificate <= 1e-10);
    }

    #[test]
    fn kink_at_optimum() {
        let (t, rep) = minimize_scalar_convex(f64::abs, (-10.0, 10.0), 1e-10, 40).unwrap();
        assert!(t.abs() < 1e-9);
        assert!(rep.converged);
    }

    #[test]
    fn far_minimum_and_negative_side() {
        let (t, _) =
            minimize_scalar_convex(|t| (t + 1234.5).powi(2), (-10.0, 10.0), 1e-8, 40).unwrap();
        assert!((t + 1234.5).abs() < 1e-6);
    }

    #[test]
    fn flat_function_returns_midpoint() {
        let (t, rep) = minimize_scalar_convex(|_| 0.25, (-10.0, 10.0), 1e-10, 40).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(rep.certificate, 0.0);
        assert!(rep.converged);
    }

    #[test]
    fn unbounded_below_fails_to_bracket() {
        let err = minimize_scalar_convex(|t| -t, (-10.0, 10.0), 1e-10, 40).unwrap_err();
        assert_eq!(err, Error::BracketFailure { expansions: 40 });
    }

    #[test]
    fn deterministic() {
        let f = |t: f64| (t - 0.3).powi(4) + t.exp();
        let a = minimize_scalar_convex(f, (-10.0, 10.0), 1e-10, 40).unwrap();
        let b = minimize_scalar_convex(f, (-10.0, 10.0), 1e-10, 40).unwrap();
        assert_eq!(a, b);
    }
}
