//! Numerical engines: scalar convex minimization, away-step Frank-Wolfe for
//! KL objectives, and iterative proportional fitting.

mod delta;
mod ipf;
mod mixture;
mod scalar;
mod transport;

pub use delta::{minimize_cmi_over_delta, DeltaPolytope};
pub use ipf::{ipf_fit, ipf_fit_traced, MarginalConstraint};
pub use mixture::fw_kl_mixture;
pub use scalar::minimize_scalar_convex;
pub use transport::transport_vertex;

use serde::Serialize;

/// Which engine produced a report; fixes the meaning of `certificate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Certificate is the final bracket width.
    ScalarSearch,
    /// Certificate is the Frank-Wolfe duality gap.
    FrankWolfe,
    /// Certificate is the largest marginal residual.
    Ipf,
}

/// Convergence summary returned by every engine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub engine: Engine,
    pub iterations: usize,
    pub objective: f64,
    pub certificate: f64,
    pub converged: bool,
    pub tolerance_used: f64,
}

/// Exact line search for a convex `phi` on `[0, gamma_max]` given its first
/// and second derivative. `phi'(0) < 0` is assumed; a derivative of `+inf`
/// marks the edge of the domain.
pub(crate) fn line_search(gamma_max: f64, deriv: impl Fn(f64) -> (f64, f64)) -> f64 {
    let (d_max, _) = deriv(gamma_max);
    if d_max <= 0.0 {
        return gamma_max;
    }
    let (mut lo, mut hi) = (0.0, gamma_max);
    let (d0, dd0) = deriv(0.0);
    if d0 >= 0.0 {
        return 0.0;
    }
    let mut g = newton_or_mid(0.0, d0, dd0, lo, hi);
    for _ in 0..200 {
        let width = hi - lo;
        let (d, dd) = deriv(g);
        if d.is_nan() || d > 0.0 {
            hi = g;
        } else if d < 0.0 {
            lo = g;
        } else {
            return g;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.max(f64::MIN_POSITIVE) {
            break;
        }
        // A derivative that is pure rounding noise makes Newton creep one
        // ulp at a time from the same side; bisect whenever it stalls.
        g = if hi - lo > 0.5 * width {
            0.5 * (lo + hi)
        } else {
            newton_or_mid(g, d, dd, lo, hi)
        };
    }
    // phi is decreasing up to lo, so this never increases the objective.
    lo
}

fn newton_or_mid(g: f64, d: f64, dd: f64, lo: f64, hi: f64) -> f64 {
    let next = g - d / dd;
    if next.is_finite() && next > lo && next < hi {
        next
    } else {
        0.5 * (lo + hi)
    }
}
