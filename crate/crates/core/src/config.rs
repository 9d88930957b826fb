use serde::Serialize;

/// Tolerances and iteration caps shared by every solver call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Frank-Wolfe duality gap target, in bits.
    pub gap_tol: f64,
    /// Maximum absolute marginal residual accepted from IPF.
    pub marginal_tol: f64,
    /// Final bracket width for the scalar line search.
    pub scalar_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            marginal_tol: 1e-10,
            scalar_tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

impl SolverConfig {
    /// Environment variable that overrides the default tolerances.
    pub const ENV_VAR: &'static str = "PIDLAB_TOL";

    /// Uses `tol` for the gap and line-search tolerances and `tol / 10`
    /// for marginal residuals.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            gap_tol: tol,
            marginal_tol: tol / 10.0,
            scalar_tol: tol,
            ..Self::default()
        }
    }

    /// Defaults, overridden by `PIDLAB_TOL` when it parses as a positive number.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .map(Self::with_tolerance)
            .unwrap_or_default()
    }
}
