use petgraph::unionfind::UnionFind;

use super::{complete_from_terms, roles, Anchor, InfoTerms, Measure, PidResult};
use crate::dist::{entropy_of, JointDist, SUPPORT_THRESHOLD};
use crate::error::Result;

/// The Gács-Körner common random variable of two variables: the connected
/// components of the bipartite graph linking symbols that co-occur.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonPart {
    /// `H(Q)` in bits.
    pub entropy: f64,
    /// Component of each symbol of the first variable; `None` off support.
    pub a_labels: Vec<Option<usize>>,
    pub b_labels: Vec<Option<usize>>,
    /// `P(Q = q)`.
    pub law: Vec<f64>,
}

pub fn gacs_korner_common(p: &JointDist, a: &str, b: &str) -> Result<CommonPart> {
    let ab = p.marginal(&[a, b])?;
    let (na, nb) = (ab.shape()[0], ab.shape()[1]);
    let mut uf = UnionFind::<usize>::new(na + nb);
    let mut seen = vec![false; na + nb];
    for i in 0..na {
        for j in 0..nb {
            if ab.get(&[i, j]) > SUPPORT_THRESHOLD {
                uf.union(i, na + j);
                seen[i] = true;
                seen[na + j] = true;
            }
        }
    }
    // Components are numbered in order of first appearance.
    let mut ids: Vec<Option<usize>> = vec![None; na + nb];
    let mut next = 0;
    let mut labels = vec![None; na + nb];
    for v in (0..na + nb).filter(|&v| seen[v]) {
        let root = uf.find(v);
        let id = *ids[root].get_or_insert_with(|| {
            next += 1;
            next - 1
        });
        labels[v] = Some(id);
    }
    let mut law = vec![0.0; next];
    for i in 0..na {
        if let Some(q) = labels[i] {
            law[q] += (0..nb).map(|j| ab.get(&[i, j])).sum::<f64>();
        }
    }
    let b_labels = labels.split_off(na);
    Ok(CommonPart {
        entropy: entropy_of(&law),
        a_labels: labels,
        b_labels,
        law,
    })
}

/// `SI = I(S;Q)` for the common part `Q` of `Y` and `Z`.
pub fn si_cap_wedge(p: &JointDist) -> Result<PidResult> {
    let [s, y, z] = roles(p)?;
    let common = gacs_korner_common(p, y, z)?;
    let sy = p.marginal(&[s, y])?;
    let (ns, ny) = (sy.shape()[0], sy.shape()[1]);
    let nq = common.law.len();
    let mut sq = vec![0.0; ns * nq];
    let mut ps = vec![0.0; ns];
    for si in 0..ns {
        for yi in 0..ny {
            let m = sy.get(&[si, yi]);
            ps[si] += m;
            if let Some(q) = common.a_labels[yi] {
                sq[si * nq + q] += m;
            }
        }
    }
    let si = (entropy_of(&ps) + common.entropy - entropy_of(&sq)).max(0.0);
    complete_from_terms(&InfoTerms::of(p)?, Anchor::Si(si), Measure::CapWedge.into())
}
