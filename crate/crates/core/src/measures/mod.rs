//! The decomposition catalogue. Every measure takes a 3-variable
//! distribution ordered `(S, Y, Z)` and returns the four components
//! `SI`, `UI(S;Y\Z)`, `UI(S;Z\Y)` and `CI` in bits.

mod broja;
mod cap;
mod construction;
mod dep;
mod ig;
mod min;
mod mmi;
mod red;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::config::SolverConfig;
use crate::dist::JointDist;
use crate::error::{Error, Result};
use crate::opt::SolveReport;

pub use broja::ui_broja;
pub use cap::{gacs_korner_common, si_cap_wedge, CommonPart};
pub use construction::ui_construction;
pub use dep::{dep_candidates, ui_dep};
pub use ig::{decomp_ig, ig_projection, IgProjection};
pub use min::{si_min, specific_information, SpecificInfo};
pub use mmi::si_mmi;
pub use red::{i_searrow, si_red};

/// Tolerance on the consistency condition `I(S;Y) + UI_z = I(S;Z) + UI_y`.
pub const ANCHOR_TOLERANCE: f64 = 1e-7;

/// The measures computable from a distribution alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Min,
    Mmi,
    Red,
    Broja,
    Dep,
    Ig,
    CapWedge,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Min,
        Measure::Mmi,
        Measure::Red,
        Measure::Broja,
        Measure::Dep,
        Measure::Ig,
        Measure::CapWedge,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Min => "min",
            Measure::Mmi => "mmi",
            Measure::Red => "red",
            Measure::Broja => "broja",
            Measure::Dep => "dep",
            Measure::Ig => "ig",
            Measure::CapWedge => "cap_wedge",
        }
    }

    pub fn compute(&self, p: &JointDist, cfg: &SolverConfig) -> Result<PidResult> {
        match self {
            Measure::Min => si_min(p),
            Measure::Mmi => si_mmi(p),
            Measure::Red => si_red(p, cfg),
            Measure::Broja => ui_broja(p, cfg),
            Measure::Dep => ui_dep(p, cfg),
            Measure::Ig => decomp_ig(p, cfg),
            Measure::CapWedge => si_cap_wedge(p),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::ParameterOutOfRange(format!("unknown measure `{s}`")))
    }
}

/// Identifies which decomposition produced a result.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MeasureId {
    Catalogue(Measure),
    /// UI construction applied to externally supplied deltas, with a
    /// caller-chosen tag naming their origin.
    UiConstruction(String),
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureId::Catalogue(m) => m.fmt(f),
            MeasureId::UiConstruction(tag) => write!(f, "ui_construction({tag})"),
        }
    }
}

impl Serialize for MeasureId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl From<Measure> for MeasureId {
    fn from(m: Measure) -> Self {
        MeasureId::Catalogue(m)
    }
}

/// A bivariate decomposition of `I(S;YZ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PidResult {
    pub measure: MeasureId,
    pub si: f64,
    pub ui_y: f64,
    pub ui_z: f64,
    pub ci: f64,
    pub diagnostics: Vec<SolveReport>,
}

/// Which component a caller pins down; the rest follow from the three
/// linear identities linking the components to the mutual informations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    Si(f64),
    UiPair(f64, f64),
    Ci(f64),
}

/// The classical information terms of a 3-variable distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoTerms {
    /// `I(S;Y)`
    pub sy: f64,
    /// `I(S;Z)`
    pub sz: f64,
    /// `I(S;YZ)`
    pub syz: f64,
    /// `I(S;Y|Z)`
    pub sy_given_z: f64,
    /// `I(S;Z|Y)`
    pub sz_given_y: f64,
}

impl InfoTerms {
    pub fn of(p: &JointDist) -> Result<Self> {
        let [s, y, z] = roles(p)?;
        Ok(Self {
            sy: p.mutual_information(&[s], &[y])?,
            sz: p.mutual_information(&[s], &[z])?,
            syz: p.mutual_information(&[s], &[y, z])?,
            sy_given_z: p.conditional_mutual_information(&[s], &[y], &[z])?,
            sz_given_y: p.conditional_mutual_information(&[s], &[z], &[y])?,
        })
    }
}

impl PidResult {
    pub fn components(&self) -> [f64; 4] {
        [self.si, self.ui_y, self.ui_z, self.ci]
    }

    /// Residuals of `SI + UI_y = I(S;Y)`, `SI + UI_z = I(S;Z)` and
    /// `SI + UI_y + UI_z + CI = I(S;YZ)`.
    pub fn residuals(&self, terms: &InfoTerms) -> [f64; 3] {
        [
            self.si + self.ui_y - terms.sy,
            self.si + self.ui_z - terms.sz,
            self.si + self.ui_y + self.ui_z + self.ci - terms.syz,
        ]
    }

    /// Whether every solver behind this result met its tolerance.
    pub fn converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }
}

/// Fills in the remaining components from one anchor.
pub fn complete_decomposition(
    p: &JointDist,
    anchor: Anchor,
    measure: impl Into<MeasureId>,
) -> Result<PidResult> {
    let terms = InfoTerms::of(p)?;
    complete_from_terms(&terms, anchor, measure.into())
}

pub(crate) fn complete_from_terms(
    t: &InfoTerms,
    anchor: Anchor,
    measure: MeasureId,
) -> Result<PidResult> {
    let finite = match anchor {
        Anchor::Si(v) | Anchor::Ci(v) => v.is_finite(),
        Anchor::UiPair(a, b) => a.is_finite() && b.is_finite(),
    };
    if !finite {
        return Err(Error::InvalidDistribution(format!(
            "non-finite anchor {anchor:?}"
        )));
    }
    let si = match anchor {
        Anchor::Si(si) => si,
        Anchor::UiPair(uy, uz) => {
            let defect = (t.sy + uz) - (t.sz + uy);
            if defect.abs() > ANCHOR_TOLERANCE {
                return Err(Error::InconsistentAnchor { defect });
            }
            0.5 * ((t.sy - uy) + (t.sz - uz))
        }
        // I(S;YZ) = I(S;Y) + I(S;Z) - SI + CI.
        Anchor::Ci(ci) => t.sy + t.sz + ci - t.syz,
    };
    let ui_y = t.sy - si;
    let ui_z = t.sz - si;
    Ok(PidResult {
        measure,
        si,
        ui_y,
        ui_z,
        ci: t.syz - si - ui_y - ui_z,
        diagnostics: Vec::new(),
    })
}

/// Names of `(S, Y, Z)`; rejects anything but three variables.
pub(crate) fn roles(p: &JointDist) -> Result<[&str; 3]> {
    match p.names()[..] {
        [s, y, z] => Ok([s, y, z]),
        _ => Err(Error::ShapeMismatch(format!(
            "decompositions need exactly 3 variables (S, Y, Z), got {}",
            p.arity()
        ))),
    }
}

/// The same distribution with the two sources exchanged.
pub fn swap_sources(p: &JointDist) -> Result<JointDist> {
    let [s, y, z] = roles(p)?;
    p.reorder(&[s, z, y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Variable;

    pub(crate) fn bits() -> Vec<Variable> {
        ["S", "Y", "Z"]
            .iter()
            .map(|n| Variable::with_cardinality(*n, 2).unwrap())
            .collect()
    }

    pub(crate) fn gate(f: impl Fn(usize, usize) -> usize) -> JointDist {
        let mut m = vec![0.0; 8];
        for y in 0..2 {
            for z in 0..2 {
                m[(f(y, z) * 2 + y) * 2 + z] = 0.25;
            }
        }
        JointDist::new(bits(), m).unwrap()
    }

    #[test]
    fn xor_with_zero_shared() {
        let r = complete_decomposition(&gate(|y, z| y ^ z), Anchor::Si(0.0), Measure::Mmi).unwrap();
        assert!(r.ui_y.abs() < 1e-15 && r.ui_z.abs() < 1e-15);
        assert!((r.ci - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_informations_leave_no_unique_part() {
        let p = gate(|y, z| y & z);
        let t = InfoTerms::of(&p).unwrap();
        let r = complete_decomposition(&p, Anchor::Si(t.sy), Measure::Mmi).unwrap();
        assert!(r.ui_y.abs() < 1e-15 && r.ui_z.abs() < 1e-15);
    }

    #[test]
    fn inconsistent_pair_is_rejected() {
        let p = gate(|y, z| y & z);
        let err = complete_decomposition(&p, Anchor::UiPair(0.1, 0.0), Measure::Broja).unwrap_err();
        match err {
            Error::InconsistentAnchor { defect } => assert!((defect.abs() - 0.1).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn anchors_agree() {
        let p = JointDist::new(bits(), vec![0.05, 0.1, 0.15, 0.2, 0.12, 0.08, 0.17, 0.13]).unwrap();
        let t = InfoTerms::of(&p).unwrap();
        let a = complete_decomposition(&p, Anchor::Si(0.01), Measure::Min).unwrap();
        let b = complete_decomposition(&p, Anchor::Ci(a.ci), Measure::Min).unwrap();
        let c = complete_decomposition(&p, Anchor::UiPair(a.ui_y, a.ui_z), Measure::Min).unwrap();
        for r in [&a, &b, &c] {
            assert!((r.si - 0.01).abs() < 1e-14);
            assert!(r.residuals(&t).iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.as_str().parse::<Measure>().unwrap(), m);
        }
        assert!("gh".parse::<Measure>().is_err());
        assert_eq!(
            MeasureId::UiConstruction("skr".into()).to_string(),
            "ui_construction(skr)"
        );
    }

    #[test]
    fn four_variables_are_rejected() {
        let vars = ["S", "Y", "Z", "U"]
            .iter()
            .map(|n| Variable::with_cardinality(*n, 2).unwrap())
            .collect();
        let p = JointDist::uniform(vars).unwrap();
        assert!(matches!(InfoTerms::of(&p), Err(Error::ShapeMismatch(_))));
    }
}
