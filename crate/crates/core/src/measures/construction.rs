use super::{InfoTerms, MeasureId, PidResult};
use crate::dist::JointDist;
use crate::error::{Error, Result};

const SLACK: f64 = 1e-9;

/// Builds a full decomposition from a pair of candidate unique informations
/// `delta_y` and `delta_z`:
///
/// ```text
/// UI_y = max{δy, δz + I(S;Y) - I(S;Z)}    SI = min{I(S;Y) - δy, I(S;Z) - δz}
/// UI_z = max{δz, δy + I(S;Z) - I(S;Y)}    CI = min{I(S;Y|Z) - δy, I(S;Z|Y) - δz}
/// ```
///
/// Each delta must lie in `[0, min{I(S;side), I(S;side|other)}]`.
pub fn ui_construction(p: &JointDist, delta_y: f64, delta_z: f64, tag: &str) -> Result<PidResult> {
    let t = InfoTerms::of(p)?;
    check("Y", delta_y, t.sy.min(t.sy_given_z))?;
    check("Z", delta_z, t.sz.min(t.sz_given_y))?;
    Ok(PidResult {
        measure: MeasureId::UiConstruction(tag.to_string()),
        si: (t.sy - delta_y).min(t.sz - delta_z),
        ui_y: delta_y.max(delta_z + t.sy - t.sz),
        ui_z: delta_z.max(delta_y + t.sz - t.sy),
        ci: (t.sy_given_z - delta_y).min(t.sz_given_y - delta_z),
        diagnostics: Vec::new(),
    })
}

fn check(side: &'static str, value: f64, bound: f64) -> Result<()> {
    if !value.is_finite() || value < -SLACK || value > bound + SLACK {
        return Err(Error::DeltaOutOfRange { side, value, bound });
    }
    Ok(())
}
