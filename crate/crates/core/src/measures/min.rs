use super::{complete_from_terms, roles, Anchor, InfoTerms, Measure, PidResult};
use crate::dist::JointDist;
use crate::error::{Error, Result};

/// Information that the outcome `S = outcome` carries about one source.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecificInfo {
    pub outcome: String,
    pub value: f64,
}

/// `I(S=s;T) = sum_t P(t|s) log2(P(s|t) / P(s))`, where `S` is the first
/// variable of `p`.
pub fn specific_information(p: &JointDist, outcome: &str, target: &str) -> Result<SpecificInfo> {
    let s_name = p.names()[0];
    let s = p.variables()[0]
        .alphabet
        .index_of(outcome)
        .ok_or_else(|| Error::UnknownVariable(format!("{s_name}={outcome}")))?;
    match specific_all(p, target)?[s] {
        Some(value) => Ok(SpecificInfo {
            outcome: outcome.to_string(),
            value,
        }),
        None => Err(Error::ZeroProbabilityOutcome(format!("{s_name}={outcome}"))),
    }
}

/// Specific information for every outcome of the first variable; `None`
/// where the outcome has zero probability.
pub(crate) fn specific_all(p: &JointDist, target: &str) -> Result<Vec<Option<f64>>> {
    let s_name = p.names()[0];
    if s_name == target {
        return Err(Error::OverlappingGroups(target.to_string()));
    }
    let joint = p.marginal(&[s_name, target])?;
    let shape = joint.shape();
    let (ns, nt) = (shape[0], shape[1]);
    let m = joint.mass();
    let ps: Vec<f64> = (0..ns)
        .map(|s| m[s * nt..(s + 1) * nt].iter().sum())
        .collect();
    let pt: Vec<f64> = (0..nt)
        .map(|t| (0..ns).map(|s| m[s * nt + t]).sum())
        .collect();
    Ok((0..ns)
        .map(|s| {
            (ps[s] > 0.0).then(|| {
                (0..nt)
                    .filter(|&t| m[s * nt + t] > 0.0)
                    .map(|t| {
                        let pst = m[s * nt + t];
                        // P(t|s) log2(P(s,t) / (P(s) P(t)))
                        pst / ps[s] * (pst / (ps[s] * pt[t])).log2()
                    })
                    .sum()
            })
        })
        .collect())
}

/// `SI_min = sum_s P(s) min{ I(S=s;Y), I(S=s;Z) }`.
pub fn si_min(p: &JointDist) -> Result<PidResult> {
    let [s, y, z] = roles(p)?;
    let iy = specific_all(p, y)?;
    let iz = specific_all(p, z)?;
    let ps = p.marginal(&[s])?;
    let si = ps
        .mass()
        .iter()
        .zip(iy.iter().zip(&iz))
        .filter_map(|(w, pair)| match pair {
            (Some(a), Some(b)) => Some(w * a.min(*b)),
            _ => None,
        })
        .sum();
    complete_from_terms(&InfoTerms::of(p)?, Anchor::Si(si), Measure::Min.into())
}
