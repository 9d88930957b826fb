use serde::Serialize;

use super::family::{generate, FamilySpec};
use crate::config::SolverConfig;
use crate::dist::JointDist;
use crate::error::{Error, Result};
use crate::measures::{InfoTerms, Measure, MeasureId, PidResult};
use crate::opt::{minimize_cmi_over_delta, DeltaPolytope, SolveReport};

/// Jumps above this many bits are discontinuities.
pub const DISCONTINUITY_THRESHOLD: f64 = 0.05;
/// Jumps (and the change over the last two probes) below this are continuity.
pub const CONTINUITY_THRESHOLD: f64 = 1e-4;

/// Default probe sequence for the continuity checks.
pub const PROBE_SEQUENCE: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// The three residuals of `SI + UI_y = I(S;Y)`, `SI + UI_z = I(S;Z)` and
/// `SI + UI_y + UI_z + CI = I(S;YZ)`, in bits.
pub fn consistency_check(p: &JointDist, result: &PidResult) -> Result<[f64; 3]> {
    Ok(result.residuals(&InfoTerms::of(p)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Si,
    UiY,
    UiZ,
    Ci,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::Si, Component::UiY, Component::UiZ, Component::Ci];

    pub fn of(&self, r: &PidResult) -> f64 {
        match self {
            Component::Si => r.si,
            Component::UiY => r.ui_y,
            Component::UiZ => r.ui_z,
            Component::Ci => r.ci,
        }
    }
}

/// Value on a composite system minus the sum of the values on its parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub measure: MeasureId,
    pub component: Component,
    pub defect: f64,
    pub inputs: String,
}

/// `P1 ⊗ P2` with `S`, `Y` and `Z` paired up.
pub fn product_system(p1: &JointDist, p2: &JointDist) -> Result<JointDist> {
    p1.tensor_product(p2, &[("S", "S", "S"), ("Y", "Y", "Y"), ("Z", "Z", "Z")])
}

/// Per-component defects of an arbitrary decomposition.
pub fn defects_with<F>(
    f: F,
    p1: &JointDist,
    p2: &JointDist,
    inputs: &str,
) -> Result<Vec<DefectReport>>
where
    F: Fn(&JointDist) -> Result<PidResult>,
{
    let whole = f(&product_system(p1, p2)?)?;
    let (a, b) = (f(p1)?, f(p2)?);
    for r in [&whole, &a, &b] {
        unconverged(r)?;
    }
    Ok(Component::ALL
        .iter()
        .map(|c| DefectReport {
            measure: whole.measure.clone(),
            component: *c,
            defect: c.of(&whole) - c.of(&a) - c.of(&b),
            inputs: inputs.to_string(),
        })
        .collect())
}

/// A result whose solvers missed their tolerance is not evidence either way.
fn unconverged(r: &PidResult) -> Result<()> {
    match r.diagnostics.iter().find(|d| !d.converged) {
        Some(d) => Err(Error::InvalidDistribution(format!(
            "{} solver did not converge: certificate {:e} > {:e}",
            r.measure, d.certificate, d.tolerance_used
        ))),
        None => Ok(()),
    }
}

/// Defects of `measure` on `P1 ⊗ P2` against the sum over the factors, one
/// report per component.
pub fn additivity_defect(
    measure: Measure,
    p1: &JointDist,
    p2: &JointDist,
    cfg: &SolverConfig,
    inputs: &str,
) -> Result<Vec<DefectReport>> {
    defects_with(|p| measure.compute(p, cfg), p1, p2, inputs)
}

/// [`additivity_defect`] with both factors equal.
pub fn iid_additivity_check(
    measure: Measure,
    p: &JointDist,
    cfg: &SolverConfig,
    inputs: &str,
) -> Result<Vec<DefectReport>> {
    additivity_defect(measure, p, p, cfg, inputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Continuous,
    Discontinuous,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityProbe {
    pub measure: Measure,
    pub family: String,
    pub sequence: Vec<f64>,
    /// `SI` at each parameter of the sequence.
    pub values: Vec<f64>,
    /// Last value of the sequence.
    pub limit_estimate: f64,
    pub boundary_value: f64,
    /// `limit_estimate - boundary_value`, signed.
    pub jump: f64,
    pub verdict: Verdict,
}

/// Evaluates `SI` of `measure` along `curve(a)` for the decreasing sequence
/// and at `a = 0`.
pub fn continuity_probe(
    measure: Measure,
    curve: impl Fn(f64) -> FamilySpec,
    sequence: &[f64],
    cfg: &SolverConfig,
) -> Result<ContinuityProbe> {
    if sequence.is_empty() {
        return Err(Error::ParameterOutOfRange("empty probe sequence".into()));
    }
    let si = |a: f64| -> Result<f64> { Ok(measure.compute(&generate(&curve(a))?, cfg)?.si) };
    let values = sequence
        .iter()
        .map(|&a| si(a))
        .collect::<Result<Vec<_>>>()?;
    let boundary_value = si(0.0)?;
    let limit_estimate = *values.last().expect("nonempty");
    let jump = limit_estimate - boundary_value;
    let settled = values.len() < 2
        || (values[values.len() - 2] - limit_estimate).abs() < CONTINUITY_THRESHOLD;
    let verdict = if jump.abs() > DISCONTINUITY_THRESHOLD {
        Verdict::Discontinuous
    } else if jump.abs() < CONTINUITY_THRESHOLD && settled {
        Verdict::Continuous
    } else {
        Verdict::Inconclusive
    };
    Ok(ContinuityProbe {
        measure,
        family: curve(0.0).label(),
        sequence: sequence.to_vec(),
        values,
        limit_estimate,
        boundary_value,
        jump,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LockingReport {
    /// `UI(S;Y\ZU)`.
    pub lhs: f64,
    /// `UI(S;Y\Z) - H(U)`.
    pub rhs: f64,
    pub slack: f64,
    pub diagnostics: Vec<SolveReport>,
}

/// Compares `UI_BROJA(S;Y\ZU)` with `UI_BROJA(S;Y\Z) - H(U)` on a
/// distribution over `(S, Y, Z, U)`.
pub fn locking_check(p4: &JointDist, cfg: &SolverConfig) -> Result<LockingReport> {
    if p4.names() != ["S", "Y", "Z", "U"] {
        return Err(Error::ShapeMismatch(format!(
            "locking needs variables (S, Y, Z, U), got {:?}",
            p4.names()
        )));
    }
    let ui = |p: &JointDist| {
        minimize_cmi_over_delta(&DeltaPolytope::from_dist(p)?, cfg.gap_tol, cfg.max_iter)
    };
    let (_, with_u) = ui(&p4.combine_variables(&["Z", "U"], "ZU")?)?;
    let (_, without) = ui(&p4.marginal(&["S", "Y", "Z"])?)?;
    let lhs = with_u.objective;
    let rhs = without.objective - p4.entropy(&["U"])?;
    Ok(LockingReport {
        lhs,
        rhs,
        slack: lhs - rhs,
        diagnostics: vec![with_u, without],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmiBound {
    /// `max SI - SI_MMI` over measures and trials.
    pub worst: f64,
    pub measure: Option<Measure>,
    pub family: Option<String>,
}

/// Largest excess of `SI` over `SI_MMI` across `measures` and the given
/// inputs. Measures undefined on an input (IG off full support) are skipped.
pub fn mmi_bound_sweep(
    measures: &[Measure],
    inputs: &[FamilySpec],
    cfg: &SolverConfig,
) -> Result<MmiBound> {
    use rayon::prelude::*;
    let per_input = inputs
        .par_iter()
        .map(|spec| -> Result<Vec<(f64, Measure)>> {
            let p = generate(spec)?;
            let mmi = Measure::Mmi.compute(&p, cfg)?.si;
            let mut out = Vec::new();
            for m in measures {
                match m.compute(&p, cfg) {
                    Ok(r) => out.push((r.si - mmi, *m)),
                    Err(Error::NotFullSupport { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut bound = MmiBound {
        worst: f64::NEG_INFINITY,
        measure: None,
        family: None,
    };
    for (spec, rows) in inputs.iter().zip(per_input) {
        for (v, m) in rows {
            if v > bound.worst {
                bound = MmiBound {
                    worst: v,
                    measure: Some(m),
                    family: Some(spec.label()),
                };
            }
        }
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::si_mmi;

    #[test]
    fn xor_mmi_is_consistent() {
        let p = generate(&FamilySpec::Xor).unwrap();
        let r = si_mmi(&p).unwrap();
        assert!(consistency_check(&p, &r)
            .unwrap()
            .iter()
            .all(|x| x.abs() <= 1e-12));
    }

    #[test]
    fn inflated_si_is_reported() {
        let p = generate(&FamilySpec::dirichlet(3)).unwrap();
        let mut r = si_mmi(&p).unwrap();
        r.si += 0.1;
        let res = consistency_check(&p, &r).unwrap();
        assert!(res.iter().all(|x| (x - 0.1).abs() < 1e-12), "{res:?}");
    }

    #[test]
    fn point_mass_has_no_defect() {
        let p = JointDist::point_mass(
            generate(&FamilySpec::Xor).unwrap().variables().to_vec(),
            &[0, 1, 1],
        )
        .unwrap();
        for m in [
            Measure::Min,
            Measure::Mmi,
            Measure::Red,
            Measure::Broja,
            Measure::Dep,
            Measure::CapWedge,
        ] {
            let d = iid_additivity_check(m, &p, &SolverConfig::default(), "point").unwrap();
            assert!(d.iter().all(|r| r.defect.abs() < 1e-12), "{m}: {d:?}");
        }
    }

    #[test]
    fn mmi_orders_in_opposite_directions_are_not_additive() {
        let p1 = generate(&FamilySpec::Unq).unwrap();
        let p2 = swap(&p1);
        let d = additivity_defect(
            Measure::Mmi,
            &p1,
            &p2,
            &SolverConfig::default(),
            "unq x swapped",
        )
        .unwrap();
        // min{1,1} - min{1,0} - min{0,1} = 1.
        assert!((d[0].defect - 1.0).abs() < 1e-12);
    }

    fn swap(p: &JointDist) -> JointDist {
        crate::measures::swap_sources(p)
            .unwrap()
            .rename(&["S", "Y", "Z"])
            .unwrap()
    }

    #[test]
    fn red_family_probe() {
        let cfg = SolverConfig::default();
        let red = continuity_probe(
            Measure::Red,
            |a| FamilySpec::RedDiscontinuity { a },
            &PROBE_SEQUENCE,
            &cfg,
        )
        .unwrap();
        assert_eq!(red.verdict, Verdict::Discontinuous);
        assert!((red.jump - 0.14624).abs() < 1e-3, "{}", red.jump);
        let broja = continuity_probe(
            Measure::Broja,
            |a| FamilySpec::RedDiscontinuity { a },
            &PROBE_SEQUENCE,
            &cfg,
        )
        .unwrap();
        assert_eq!(broja.verdict, Verdict::Continuous, "{broja:?}");
    }

    #[test]
    fn gk_family_probe() {
        let cfg = SolverConfig::default();
        let probe = continuity_probe(
            Measure::CapWedge,
            |eps| FamilySpec::GkDiscontinuity { eps },
            &PROBE_SEQUENCE,
            &cfg,
        )
        .unwrap();
        assert_eq!(probe.boundary_value, 1.0);
        assert_eq!(probe.jump, -1.0);
        assert_eq!(probe.verdict, Verdict::Discontinuous);
    }

    #[test]
    fn locking_degenerate_cases() {
        let cfg = SolverConfig::default();
        let p = generate(&FamilySpec::dirichlet(11)).unwrap();
        let r = locking_check(&append_constant(&p), &cfg).unwrap();
        assert!(r.slack.abs() < 1e-9, "{r:?}");

        // U = Y: the adversary sees Y, so the left side vanishes.
        let mut m = Vec::new();
        for s in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    for uu in 0..2 {
                        m.push(if uu == y { p.get(&[s, y, z]) } else { 0.0 });
                    }
                }
            }
        }
        let vars = generate(&FamilySpec::dirichlet_dims(0, &[2, 2, 2, 2]))
            .unwrap()
            .variables()
            .to_vec();
        let r = locking_check(&JointDist::new(vars, m).unwrap(), &cfg).unwrap();
        assert!(r.lhs.abs() < 1e-8, "{r:?}");
        assert!(r.slack >= -1e-6);
    }

    fn append_constant(p: &JointDist) -> JointDist {
        let mut vars = p.variables().to_vec();
        vars.push(crate::dist::Variable::with_cardinality("U", 1).unwrap());
        JointDist::new(vars, p.mass().to_vec()).unwrap()
    }

    #[test]
    fn copy_gate_stays_below_mmi() {
        let b =
            mmi_bound_sweep(&Measure::ALL, &[FamilySpec::Copy], &SolverConfig::default()).unwrap();
        assert!(b.worst <= 1e-12, "{b:?}");
    }
}
