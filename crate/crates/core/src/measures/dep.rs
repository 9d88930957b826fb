use super::{complete_from_terms, roles, Anchor, InfoTerms, Measure, PidResult};
use crate::config::SolverConfig;
use crate::dist::JointDist;
use crate::error::Result;
use crate::opt::{ipf_fit, DeltaPolytope, MarginalConstraint, SolveReport};

/// The two maximum-entropy candidates: the Markov chain `Y - S - Z`
/// (closed form) and the fit to all three pair marginals (by IPF).
pub fn dep_candidates(p: &JointDist, cfg: &SolverConfig) -> Result<([JointDist; 2], SolveReport)> {
    let [s, y, z] = roles(p)?;
    let markov = DeltaPolytope::from_dist(p)?.markov_point();
    let constraints = [[s, y], [s, z], [y, z]]
        .iter()
        .map(|pair| MarginalConstraint::from_dist(p, pair))
        .collect::<Result<Vec<_>>>()?;
    let (fitted, report) = ipf_fit(p.variables(), &constraints, cfg.marginal_tol, cfg.max_iter)?;
    Ok(([markov, fitted], report))
}

/// `UI_dep(S;Y\Z) = min{ I_{P_{Y-S-Z}}(S;Y|Z), I_{P_Δ}(S;Y|Z) }` and
/// symmetrically for `Z`.
pub fn ui_dep(p: &JointDist, cfg: &SolverConfig) -> Result<PidResult> {
    let [s, y, z] = roles(p)?;
    let (candidates, report) = dep_candidates(p, cfg)?;
    let mut ui_y = f64::INFINITY;
    let mut ui_z = f64::INFINITY;
    // Strict comparisons keep the first (Markov) candidate on ties.
    for q in &candidates {
        ui_y = ui_y.min(q.conditional_mutual_information(&[s], &[y], &[z])?);
        ui_z = ui_z.min(q.conditional_mutual_information(&[s], &[z], &[y])?);
    }
    let mut r = complete_from_terms(
        &InfoTerms::of(p)?,
        Anchor::UiPair(ui_y, ui_z),
        Measure::Dep.into(),
    )?;
    r.diagnostics = vec![report];
    Ok(r)
}
