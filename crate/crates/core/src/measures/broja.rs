use super::{complete_from_terms, Anchor, InfoTerms, Measure, PidResult};
use crate::config::SolverConfig;
use crate::dist::JointDist;
use crate::error::Result;
use crate::opt::{minimize_cmi_over_delta, DeltaPolytope};

/// `UI(S;Y\Z) = min over Q in Δ_P of I_Q(S;Y|Z)`, and symmetrically for
/// `Z`. The two programs are solved separately; their consistency is then
/// checked rather than assumed.
pub fn ui_broja(p: &JointDist, cfg: &SolverConfig) -> Result<PidResult> {
    let poly = DeltaPolytope::from_dist(p)?;
    let (_, rep_y) = minimize_cmi_over_delta(&poly, cfg.gap_tol, cfg.max_iter)?;
    let (_, rep_z) = minimize_cmi_over_delta(&poly.swapped(), cfg.gap_tol, cfg.max_iter)?;
    let mut r = complete_from_terms(
        &InfoTerms::of(p)?,
        Anchor::UiPair(rep_y.objective, rep_z.objective),
        Measure::Broja.into(),
    )?;
    r.diagnostics = vec![rep_y, rep_z];
    Ok(r)
}
