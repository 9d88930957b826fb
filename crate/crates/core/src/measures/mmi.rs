use super::{complete_from_terms, Anchor, InfoTerms, Measure, PidResult};
use crate::dist::JointDist;
use crate::error::Result;

/// `SI_MMI = min{ I(S;Y), I(S;Z) }`.
pub fn si_mmi(p: &JointDist) -> Result<PidResult> {
    let t = InfoTerms::of(p)?;
    complete_from_terms(&t, Anchor::Si(t.sy.min(t.sz)), Measure::Mmi.into())
}
