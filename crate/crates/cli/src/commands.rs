use std::fs;
use std::path::Path;

use pidlab::harness::suites::{run_suite, Suite};
use pidlab::harness::{generate, FamilySpec};
use pidlab::measures::{ui_construction, InfoTerms, Measure, PidResult};
use pidlab::{Error, JointDist, SolverConfig};

use crate::distfile::DistFile;
use crate::error::{CliError, CliResult};
use crate::report::{
    emit, ComputeBody, ConstructionBody, ReportFile, ResultEntry, Roles, Skipped, VerifyBody,
    CONSTRUCTION_TOLERANCE,
};

/// Reads a DistFile and returns its raw bytes with the parsed distribution.
pub fn load(path: &Path) -> CliResult<(Vec<u8>, JointDist)> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse(e.to_string()))?;
    let dist = DistFile::from_json(text)?.to_dist()?;
    Ok((bytes, dist))
}

/// The `(target, source, source)` view of `p`; other variables are
/// marginalized out.
pub fn with_roles(p: &JointDist, target: &str, sources: &[String]) -> CliResult<(JointDist, Roles)> {
    let [y, z] = match sources {
        [y, z] => [y.as_str(), z.as_str()],
        _ => {
            return Err(CliError::Parse(format!(
                "expected two sources, got {}",
                sources.len()
            )))
        }
    };
    let names = [target, y, z];
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(CliError::Parse(format!("variable `{n}` given two roles")));
        }
        if p.var_index(n).is_err() {
            return Err(CliError::Parse(format!("role variable `{n}` not in the input")));
        }
    }
    let view = p.marginal(&names).map_err(CliError::validation)?;
    let roles = Roles {
        target: target.into(),
        sources: [y.into(), z.into()],
    };
    Ok((view, roles))
}

/// `"all"` or a comma-separated list of measure names.
pub fn parse_measures(list: &str) -> CliResult<Option<Vec<Measure>>> {
    if list.trim() == "all" {
        return Ok(None);
    }
    list.split(',')
        .map(|m| m.trim().parse::<Measure>().map_err(|e| CliError::Parse(e.to_string())))
        .collect::<CliResult<Vec<_>>>()
        .map(Some)
}

fn solver_error(measure: &str, e: Error) -> CliError {
    // A measure undefined on this input is a property of the input.
    if matches!(e, Error::NotFullSupport { .. }) {
        return CliError::Validation(format!("measure `{measure}`: {e}"));
    }
    CliError::Solver {
        measure: measure.to_string(),
        message: e.to_string(),
        report: None,
    }
}

fn require_converged(r: PidResult) -> CliResult<PidResult> {
    if let Some(d) = r.diagnostics.iter().find(|d| !d.converged) {
        return Err(CliError::Solver {
            measure: r.measure.to_string(),
            message: format!(
                "no convergence: certificate {:e} above tolerance {:e} after {} iterations",
                d.certificate, d.tolerance_used, d.iterations
            ),
            report: Some(d.clone()),
        });
    }
    Ok(r)
}

pub struct ComputeArgs<'a> {
    pub input: &'a Path,
    pub target: &'a str,
    pub sources: &'a [String],
    pub measures: &'a str,
    pub out: Option<&'a Path>,
}

pub fn compute(args: &ComputeArgs, cfg: &SolverConfig) -> CliResult<()> {
    let requested = parse_measures(args.measures)?;
    let (bytes, p) = load(args.input)?;
    let (view, roles) = with_roles(&p, args.target, args.sources)?;
    let terms = InfoTerms::of(&view).map_err(CliError::validation)?;

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for m in requested.clone().unwrap_or_else(|| Measure::ALL.to_vec()) {
        if requested.is_none() && m == Measure::Ig && !view.has_full_support() {
            skipped.push(Skipped {
                measure: m.to_string(),
                reason: "input lacks full support".into(),
            });
            continue;
        }
        let r = m.compute(&view, cfg).map_err(|e| solver_error(m.as_str(), e))?;
        results.push(ResultEntry::new(require_converged(r)?, &terms));
    }
    let body = ComputeBody {
        roles,
        information: terms,
        results,
        skipped,
    };
    emit(args.out, &ReportFile::new("compute", Some(&bytes), *cfg, body).to_json())
}

/// Builds a family from its CLI name and `key=value` parameters.
pub fn family_spec(name: &str, params: &[String]) -> CliResult<FamilySpec> {
    let mut pairs = Vec::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("parameter `{p}` is not key=value")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let allowed: &[&str] = match name.replace('_', "-").as_str() {
        "red-discontinuity" => &["a"],
        "gk-discontinuity" => &["eps"],
        "dirichlet-random" => &["shape", "seed", "dims"],
        "xor" | "and-gate" | "copy" | "unq" | "rdn" => &[],
        other => return Err(CliError::Parse(format!("unknown family `{other}`"))),
    };
    if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(CliError::Parse(format!("family `{name}` has no parameter `{k}`")));
    }
    let get = |k: &str| pairs.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    let real = |k: &str| -> CliResult<f64> {
        let v = get(k).ok_or_else(|| CliError::Parse(format!("missing parameter `{k}`")))?;
        crate::distfile::parse_probability(v)
    };
    let bad = |k: &str, v: &str| CliError::Parse(format!("bad value `{v}` for `{k}`"));
    Ok(match name.replace('_', "-").as_str() {
        "red-discontinuity" => FamilySpec::RedDiscontinuity { a: real("a")? },
        "gk-discontinuity" => FamilySpec::GkDiscontinuity { eps: real("eps")? },
        "xor" => FamilySpec::Xor,
        "and-gate" => FamilySpec::AndGate,
        "copy" => FamilySpec::Copy,
        "unq" => FamilySpec::Unq,
        "rdn" => FamilySpec::Rdn,
        _ => {
            let shape = match get("shape") {
                Some(_) => real("shape")?,
                None => 1.0,
            };
            let seed = match get("seed") {
                Some(v) => v.parse().map_err(|_| bad("seed", v))?,
                None => 0,
            };
            let dims = match get("dims") {
                Some(v) => v
                    .split('x')
                    .map(|d| d.trim().parse::<usize>().map_err(|_| bad("dims", v)))
                    .collect::<CliResult<Vec<_>>>()?,
                None => vec![2, 2, 2],
            };
            FamilySpec::DirichletRandom { shape, seed, dims }
        }
    })
}

pub fn family(name: &str, params: &[String], out: Option<&Path>) -> CliResult<()> {
    let spec = family_spec(name, params)?;
    let p = generate(&spec).map_err(CliError::validation)?;
    emit(out, &DistFile::from_dist(&p, Some(spec.label())).to_json())
}

/// Trial count used when `--trials` is not given.
pub fn default_trials(suite: Suite) -> usize {
    match suite {
        Suite::Consistency | Suite::MmiBound => 500,
        Suite::Locking | Suite::Oracle => 200,
        Suite::Additivity | Suite::Iid => 100,
        Suite::Continuity => 0,
    }
}

pub fn verify(
    suite: &str,
    trials: Option<usize>,
    seed: u64,
    out: Option<&Path>,
    cfg: &SolverConfig,
) -> CliResult<()> {
    let suite: Suite = suite.parse().map_err(|e: Error| CliError::Parse(e.to_string()))?;
    let trials = trials.unwrap_or_else(|| default_trials(suite));
    let report = run_suite(suite, trials, seed, cfg).map_err(|e| solver_error(suite.as_str(), e))?;
    let failures: Vec<String> = report.failures().map(|c| c.name.clone()).collect();
    let file = ReportFile::new("verify", None, *cfg, VerifyBody { report });
    emit(out, &file.to_json())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(format!(
            "suite {suite}: {}",
            failures.join(", ")
        )))
    }
}

pub struct ConstructionArgs<'a> {
    pub input: &'a Path,
    pub target: &'a str,
    pub sources: &'a [String],
    pub delta_y: f64,
    pub delta_z: f64,
    pub tag: &'a str,
    pub out: Option<&'a Path>,
}

pub fn construction(args: &ConstructionArgs, cfg: &SolverConfig) -> CliResult<()> {
    let (bytes, p) = load(args.input)?;
    let (view, roles) = with_roles(&p, args.target, args.sources)?;
    let terms = InfoTerms::of(&view).map_err(CliError::validation)?;
    let r = ui_construction(&view, args.delta_y, args.delta_z, args.tag)
        .map_err(CliError::validation)?;
    let body = ConstructionBody {
        roles,
        delta_y: args.delta_y,
        delta_z: args.delta_z,
        consistency_residual: terms.sy + r.ui_z - terms.sz - r.ui_y,
        consistency_tolerance: CONSTRUCTION_TOLERANCE,
        information: terms,
        result: ResultEntry::new(r, &terms),
    };
    emit(args.out, &ReportFile::new("ui-construction", Some(&bytes), *cfg, body).to_json())
}

/// `PIDLAB_TOL` if set (rejecting unusable values), otherwise defaults.
pub fn solver_config() -> CliResult<SolverConfig> {
    match std::env::var(SolverConfig::ENV_VAR) {
        Err(_) => Ok(SolverConfig::default()),
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(SolverConfig::with_tolerance(t)),
            _ => Err(CliError::Parse(format!(
                "{} must be a positive number, got `{v}`",
                SolverConfig::ENV_VAR
            ))),
        },
    }
}
