//! Seeded verification sweeps with serializable, self-checking reports.
//!
//! Trial `k` of a sweep with base seed `b` draws its input from seed
//! `b + k` (or seeds `b + 2k` and `b + 2k + 1` when it needs a pair).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::checks::{
    additivity_defect, consistency_check, continuity_probe, iid_additivity_check, locking_check,
    mmi_bound_sweep, ContinuityProbe, DefectReport, PROBE_SEQUENCE,
};
use super::family::{generate, FamilySpec};
use super::oracle::broja_oracle;
use crate::config::SolverConfig;
use crate::dist::{JointDist, Variable};
use crate::error::{Error, Result};
use crate::measures::{ui_broja, Measure};

/// Dirichlet 2×2×2 seed pairs on which each superadditive measure is
/// strictly non-additive in `SI`.
pub const ADDITIVITY_WITNESSES: [(Measure, u64, u64); 5] = [
    (Measure::Min, 0, 3),
    (Measure::Mmi, 0, 3),
    (Measure::Red, 0, 4),
    (Measure::Dep, 4, 9),
    (Measure::Ig, 0, 3),
];

/// Dirichlet 2×2×2 seed on which `SI_min` is not additive under `P ⊗ P`.
pub const IID_MIN_WITNESS: u64 = 101;

pub const RESIDUAL_TOL: f64 = 1e-7;
pub const ADDITIVE_TOL: f64 = 1e-6;
pub const SUPERADDITIVE_SLACK: f64 = 1e-7;
pub const WITNESS_MIN_DEFECT: f64 = 1e-3;
pub const LOCKING_SLACK: f64 = 1e-6;
pub const LOCKING_DEGENERATE_TOL: f64 = 1e-9;
pub const MMI_BOUND_TOL: f64 = 1e-7;
pub const ORACLE_TOL: f64 = 1e-4;
pub const ORACLE_STARTS: usize = 4;

const SUPERADDITIVE: [Measure; 5] = [
    Measure::Min,
    Measure::Mmi,
    Measure::Red,
    Measure::Dep,
    Measure::Ig,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Consistency,
    Additivity,
    Iid,
    Continuity,
    Locking,
    MmiBound,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Consistency,
        Suite::Additivity,
        Suite::Iid,
        Suite::Continuity,
        Suite::Locking,
        Suite::MmiBound,
        Suite::Oracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Consistency => "consistency",
            Suite::Additivity => "additivity",
            Suite::Iid => "iid",
            Suite::Continuity => "continuity",
            Suite::Locking => "locking",
            Suite::MmiBound => "mmi-bound",
            Suite::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::ParameterOutOfRange(format!("unknown suite `{s}`")))
    }
}

impl Serialize for Suite {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    /// Recorded only; does not affect the verdict.
    Report,
}

/// One number compared against one bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name.into(), value, Relation::AtMost, Some(bound))
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name.into(), value, Relation::AtLeast, Some(bound))
    }

    pub fn report(name: impl Into<String>, value: f64) -> Self {
        Self::new(name.into(), value, Relation::Report, None)
    }

    fn new(name: String, value: f64, relation: Relation, bound: Option<f64>) -> Self {
        let passed = bound.map(|b| match relation {
            Relation::AtLeast => value >= b,
            _ => value <= b,
        });
        Self {
            name,
            value,
            relation,
            bound,
            passed,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: SolverConfig,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ContinuityProbe>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<DefectReport>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, trials: usize, seed: u64, cfg: &SolverConfig) -> Self {
        Self {
            suite,
            trials,
            seed,
            tolerances: *cfg,
            checks: Vec::new(),
            probes: Vec::new(),
            witnesses: Vec::new(),
            passed: true,
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed != Some(false));
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.passed == Some(false))
    }
}

pub fn run_suite(
    suite: Suite,
    trials: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(suite, trials, seed, cfg);
    match suite {
        Suite::Consistency => consistency(&mut report, cfg)?,
        Suite::Additivity => additivity(&mut report, cfg)?,
        Suite::Iid => iid(&mut report, cfg)?,
        Suite::Continuity => continuity(&mut report, cfg)?,
        Suite::Locking => locking(&mut report, cfg)?,
        Suite::MmiBound => mmi_bound(&mut report, cfg)?,
        Suite::Oracle => oracle(&mut report, cfg)?,
    }
    Ok(report.finish())
}

/// Alternates 2×2×2 and 3×3×3 Dirichlet inputs.
pub fn consistency_input(seed: u64) -> FamilySpec {
    let dims: &[usize] = if seed % 2 == 0 {
        &[2, 2, 2]
    } else {
        &[3, 3, 3]
    };
    FamilySpec::dirichlet_dims(seed, dims)
}

fn seeds(r: &SuiteReport) -> Vec<u64> {
    (0..r.trials as u64)
        .map(|k| r.seed.wrapping_add(k))
        .collect()
}

fn pair_seeds(r: &SuiteReport) -> Vec<(u64, u64)> {
    (0..r.trials as u64)
        .map(|k| (r.seed.wrapping_add(2 * k), r.seed.wrapping_add(2 * k + 1)))
        .collect()
}

fn dirichlet(seed: u64) -> Result<JointDist> {
    generate(&FamilySpec::dirichlet(seed))
}

fn consistency(r: &mut SuiteReport, cfg: &SolverConfig) -> Result<()> {
    // Per input: per measure (max |residual|, min component).
    let rows = seeds(r)
        .par_iter()
        .map(|&s| -> Result<Vec<(f64, f64)>> {
            let p = generate(&consistency_input(s))?;
            Measure::ALL
                .iter()
                .map(|m| {
                    let res = m.compute(&p, cfg)?;
                    let worst = consistency_check(&p, &res)?
                        .iter()
                        .fold(0.0f64, |a, b| a.max(b.abs()));
                    let low = res
                        .components()
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min);
                    Ok((worst, low))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, m) in Measure::ALL.iter().enumerate() {
        let worst = rows.iter().map(|row| row[i].0).fold(0.0, f64::max);
        let low = rows
            .iter()
            .map(|row| row[i].1)
            .fold(f64::INFINITY, f64::min);
        r.checks.push(Check::at_most(
            format!("{m}/max_residual"),
            worst,
            RESIDUAL_TOL,
        ));
        r.checks
            .push(Check::report(format!("{m}/min_component"), low));
    }
    Ok(())
}

fn largest_abs(d: &[DefectReport]) -> f64 {
    d.iter().map(|x| x.defect.abs()).fold(0.0, f64::max)
}

fn additivity(r: &mut SuiteReport, cfg: &SolverConfig) -> Result<()> {
    let measures: Vec<Measure> = [Measure::Broja, Measure::CapWedge]
        .into_iter()
        .chain(SUPERADDITIVE)
        .collect();
    let rows = pair_seeds(r)
        .par_iter()
        .map(|&(a, b)| -> Result<Vec<Vec<DefectReport>>> {
            let (p1, p2) = (dirichlet(a)?, dirichlet(b)?);
            let inputs = format!("dirichlet({a}) x dirichlet({b})");
            measures
                .iter()
                .map(|m| additivity_defect(*m, &p1, &p2, cfg, &inputs))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, m) in measures.iter().enumerate() {
        if matches!(m, Measure::Broja | Measure::CapWedge) {
            let worst = rows
                .iter()
                .map(|row| largest_abs(&row[i]))
                .fold(0.0, f64::max);
            r.checks.push(Check::at_most(
                format!("{m}/max_abs_defect"),
                worst,
                ADDITIVE_TOL,
            ));
        } else {
            let low = rows
                .iter()
                .map(|row| row[i][0].defect)
                .fold(f64::INFINITY, f64::min);
            r.checks.push(Check::at_least(
                format!("{m}/min_si_defect"),
                low,
                -SUPERADDITIVE_SLACK,
            ));
        }
    }
    for (m, a, b) in ADDITIVITY_WITNESSES {
        let d = additivity_defect(
            m,
            &dirichlet(a)?,
            &dirichlet(b)?,
            cfg,
            &format!("dirichlet({a}) x dirichlet({b})"),
        )?;
        r.checks.push(
            Check::at_least(
                format!("{m}/witness_si_defect"),
                d[0].defect,
                WITNESS_MIN_DEFECT,
            )
            .with_note(d[0].inputs.clone()),
        );
        r.witnesses.push(d[0].clone());
    }
    Ok(())
}

fn iid(r: &mut SuiteReport, cfg: &SolverConfig) -> Result<()> {
    let measures = [
        Measure::Mmi,
        Measure::Red,
        Measure::Dep,
        Measure::Ig,
        Measure::Broja,
        Measure::CapWedge,
    ];
    let rows = seeds(r)
        .par_iter()
        .map(|&s| -> Result<Vec<f64>> {
            let p = dirichlet(s)?;
            let inputs = format!("dirichlet({s})^2");
            measures
                .iter()
                .map(|m| Ok(largest_abs(&iid_additivity_check(*m, &p, cfg, &inputs)?)))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, m) in measures.iter().enumerate() {
        let worst = rows.iter().map(|row| row[i]).fold(0.0, f64::max);
        let name = format!("{m}/max_abs_defect");
        // Open for the common-information measure: recorded, not judged.
        r.checks.push(if *m == Measure::CapWedge {
            Check::report(name, worst)
        } else {
            Check::at_most(name, worst, ADDITIVE_TOL)
        });
    }
    let d = iid_additivity_check(
        Measure::Min,
        &dirichlet(IID_MIN_WITNESS)?,
        cfg,
        &format!("dirichlet({IID_MIN_WITNESS})^2"),
    )?;
    r.checks.push(
        Check::at_least("min/witness_si_defect", d[0].defect, WITNESS_MIN_DEFECT)
            .with_note(d[0].inputs.clone()),
    );
    r.witnesses.push(d[0].clone());
    Ok(())
}

fn continuity(r: &mut SuiteReport, cfg: &SolverConfig) -> Result<()> {
    let red_curve = |a| FamilySpec::RedDiscontinuity { a };
    let gk_curve = |eps| FamilySpec::GkDiscontinuity { eps };
    let probes = [
        (
            continuity_probe(Measure::Red, red_curve, &PROBE_SEQUENCE, cfg)?,
            true,
        ),
        (
            continuity_probe(Measure::CapWedge, gk_curve, &PROBE_SEQUENCE, cfg)?,
            true,
        ),
        (
            continuity_probe(Measure::Broja, red_curve, &PROBE_SEQUENCE, cfg)?,
            false,
        ),
    ];
    for (probe, jumps) in probes {
        let name = format!("{}/{}/abs_jump", probe.measure, probe.family);
        let note = format!(
            "signed jump {:.6e}, verdict {:?}",
            probe.jump, probe.verdict
        );
        let check = if jumps {
            Check::at_least(name, probe.jump.abs(), super::DISCONTINUITY_THRESHOLD)
        } else {
            Check::at_most(name, probe.jump.abs(), super::CONTINUITY_THRESHOLD)
        };
        r.checks.push(check.with_note(note));
        r.probes.push(probe);
    }
    Ok(())
}

/// `P(S,Y,Z)` extended by a constant `U`.
fn with_constant_u(p: &JointDist) -> Result<JointDist> {
    let mut vars = p.variables().to_vec();
    vars.push(Variable::with_cardinality("U", 1)?);
    JointDist::new(vars, p.mass().to_vec())
}

fn locking(r: &mut SuiteReport, cfg: &SolverConfig) -> Result<()> {
    let slacks = seeds(r)
        .par_iter()
        .map(|&s| {
            let p = generate(&FamilySpec::dirichlet_dims(s, &[2, 2, 2, 2]))?;
            Ok(locking_check(&p, cfg)?.slack)
        })
        .collect::<Result<Vec<f64>>>()?;
    let low = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    r.checks
        .push(Check::at_least("min_slack", low, -LOCKING_SLACK));
    let constant = locking_check(&with_constant_u(&dirichlet(r.seed)?)?, cfg)?;
    r.checks.push(Check::at_most(
        "constant_u/abs_slack",
        constant.slack.abs(),
        LOCKING_DEGENERATE_TOL,
    ));
    Ok(())
}

fn mmi_bound(r: &mut SuiteReport, cfg: &SolverConfig) -> Result<()> {
    let inputs: Vec<FamilySpec> = seeds(r).into_iter().map(FamilySpec::dirichlet).collect();
    let bound = mmi_bound_sweep(&Measure::ALL, &inputs, cfg)?;
    let note = format!(
        "attained by {} on {}",
        bound.measure.map_or("-".into(), |m| m.to_string()),
        bound.family.as_deref().unwrap_or("-")
    );
    r.checks
        .push(Check::at_most("worst_si_minus_mmi", bound.worst, MMI_BOUND_TOL).with_note(note));
    Ok(())
}

fn oracle(r: &mut SuiteReport, cfg: &SolverConfig) -> Result<()> {
    let diffs = seeds(r)
        .par_iter()
        .map(|&s| -> Result<f64> {
            let p = dirichlet(s)?;
            let solved = ui_broja(&p, cfg)?.ui_y;
            Ok((solved - broja_oracle(&p, ORACLE_STARTS, s)?).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    r.checks
        .push(Check::at_most("max_abs_difference", worst, ORACLE_TOL));
    for (spec, name) in [(FamilySpec::AndGate, "and_gate"), (FamilySpec::Xor, "xor")] {
        let v = broja_oracle(&generate(&spec)?, ORACLE_STARTS, r.seed)?;
        r.checks
            .push(Check::at_most(format!("{name}/oracle_value"), v, 1e-6));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("speed".parse::<Suite>().is_err());
    }

    #[test]
    fn check_relations() {
        assert_eq!(Check::at_most("a", 1.0, 1.0).passed, Some(true));
        assert_eq!(Check::at_least("a", 0.5, 1.0).passed, Some(false));
        assert_eq!(Check::report("a", 5.0).passed, None);
    }

    #[test]
    fn small_suites_are_deterministic() {
        let cfg = SolverConfig::default();
        for suite in [Suite::Consistency, Suite::Oracle, Suite::MmiBound] {
            let a = run_suite(suite, 6, 3, &cfg).unwrap();
            assert_eq!(a, run_suite(suite, 6, 3, &cfg).unwrap());
            assert!(a.passed, "{a:?}");
        }
    }
}
