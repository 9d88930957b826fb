use super::{complete_from_terms, roles, Anchor, InfoTerms, Measure, PidResult};
use crate::config::SolverConfig;
use crate::dist::{kl_divergence, JointDist};
use crate::error::Result;
use crate::opt::{fw_kl_mixture, Engine, SolveReport};

/// `I_S(from ↘ onto)`: for each `y` in the support of `from`, the part of
/// `D(P(S|y) || P(S))` that survives projecting `P(S|y)` onto the convex
/// hull of `{P(S|z)}` over the support of `onto`, averaged over `P(y)`.
///
/// The report aggregates the per-`y` projections; its certificate is the
/// `P(y)`-weighted sum of their duality gaps, which bounds the error of the
/// returned value.
pub fn i_searrow(
    p: &JointDist,
    from: &str,
    onto: &str,
    cfg: &SolverConfig,
) -> Result<(f64, SolveReport)> {
    let s = p.names()[0];
    let prior = p.marginal(&[s])?;
    let py = p.marginal(&[from])?;
    let rows = p.conditional(s, from)?;
    let atoms: Vec<Vec<f64>> = p
        .conditional(s, onto)?
        .rows()
        .iter()
        .map(|(_, r)| r.clone())
        .collect();
    let mut total = 0.0;
    let mut report = SolveReport {
        engine: Engine::FrankWolfe,
        iterations: 0,
        objective: 0.0,
        certificate: 0.0,
        converged: true,
        tolerance_used: cfg.gap_tol,
    };
    for (y, row) in rows.rows() {
        let w = py.mass()[*y];
        let (_, rep) = fw_kl_mixture(row, &atoms, cfg.gap_tol, cfg.max_iter)?;
        total += w * (kl_divergence(row, prior.mass())? - rep.objective);
        report.iterations += rep.iterations;
        report.certificate += w * rep.certificate;
        report.converged &= rep.converged;
    }
    report.objective = total;
    Ok((total, report))
}

/// `SI_red = min{ I_S(Y↘Z), I_S(Z↘Y) }`.
pub fn si_red(p: &JointDist, cfg: &SolverConfig) -> Result<PidResult> {
    let [_, y, z] = roles(p)?;
    let (yz, rep_y) = i_searrow(p, y, z, cfg)?;
    let (zy, rep_z) = i_searrow(p, z, y, cfg)?;
    // Ties go to the Y side; only the diagnostics order depends on it.
    let (si, diagnostics) = if yz <= zy {
        (yz, vec![rep_y, rep_z])
    } else {
        (zy, vec![rep_z, rep_y])
    };
    let mut r = complete_from_terms(&InfoTerms::of(p)?, Anchor::Si(si), Measure::Red.into())?;
    r.diagnostics = diagnostics;
    Ok(r)
}
