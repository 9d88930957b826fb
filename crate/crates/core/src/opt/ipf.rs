use super::{Engine, SolveReport};
use crate::dist::{strides_of, JointDist, Variable};
use crate::error::{Error, Result};

/// Sweeps without progress before the constraints are declared inconsistent.
const STALL_SWEEPS: usize = 100;

/// A target marginal table over a subset of the variables, row-major in the
/// listed order.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalConstraint {
    pub vars: Vec<String>,
    pub table: Vec<f64>,
}

impl MarginalConstraint {
    pub fn new(vars: &[&str], table: Vec<f64>) -> Self {
        Self {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            table,
        }
    }

    /// The marginal of `p` on `vars`.
    pub fn from_dist(p: &JointDist, vars: &[&str]) -> Result<Self> {
        Ok(Self::new(vars, p.marginal(vars)?.mass().to_vec()))
    }
}

/// A constraint resolved against the tensor layout: the marginal cell each
/// full cell maps to.
struct Resolved<'a> {
    key: Vec<usize>,
    table: &'a [f64],
}

fn resolve<'a>(vars: &[Variable], c: &'a MarginalConstraint) -> Result<Resolved<'a>> {
    let shape: Vec<usize> = vars.iter().map(|v| v.alphabet.len()).collect();
    let mut idx = Vec::with_capacity(c.vars.len());
    for name in &c.vars {
        let i = vars
            .iter()
            .position(|v| &v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        if idx.contains(&i) {
            return Err(Error::OverlappingGroups(format!(
                "`{name}` repeated in constraint"
            )));
        }
        idx.push(i);
    }
    let sub_shape: Vec<usize> = idx.iter().map(|&i| shape[i]).collect();
    let cells: usize = sub_shape.iter().product();
    if c.table.len() != cells {
        return Err(Error::ShapeMismatch(format!(
            "constraint over {:?} has {} entries, expected {cells}",
            c.vars,
            c.table.len()
        )));
    }
    if let Some(v) = c.table.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("constraint entry {v}")));
    }
    let sub_strides = strides_of(&sub_shape);
    let mut key = Vec::new();
    crate::dist::for_each_cell(&shape, |_, index| {
        key.push(
            idx.iter()
                .zip(&sub_strides)
                .map(|(&i, s)| index[i] * s)
                .sum(),
        );
    });
    Ok(Resolved {
        key,
        table: &c.table,
    })
}

fn current_marginal(q: &[f64], r: &Resolved) -> Vec<f64> {
    let mut m = vec![0.0; r.table.len()];
    for (qi, &k) in q.iter().zip(&r.key) {
        m[k] += qi;
    }
    m
}

fn residual(q: &[f64], cons: &[Resolved]) -> f64 {
    cons.iter()
        .map(|r| {
            current_marginal(q, r)
                .iter()
                .zip(r.table)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Iterative proportional fitting from the uniform tensor.
///
/// Each sweep rescales the iterate to match every constraint in turn. The
/// certificate is the largest marginal residual after the last sweep; the
/// limit is the maximum-entropy tensor with the given marginals (or the
/// closure point when no full-support solution exists).
pub fn ipf_fit(
    vars: &[Variable],
    constraints: &[MarginalConstraint],
    tol: f64,
    max_iter: usize,
) -> Result<(JointDist, SolveReport)> {
    run(vars, constraints, tol, max_iter, None)
}

/// As [`ipf_fit`], additionally returning the iterate after every sweep
/// (the uniform start first).
pub fn ipf_fit_traced(
    vars: &[Variable],
    constraints: &[MarginalConstraint],
    tol: f64,
    max_iter: usize,
) -> Result<(JointDist, SolveReport, Vec<JointDist>)> {
    let mut trace = Vec::new();
    let (q, rep) = run(vars, constraints, tol, max_iter, Some(&mut trace))?;
    Ok((q, rep, trace))
}

fn run(
    vars: &[Variable],
    constraints: &[MarginalConstraint],
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<JointDist>>,
) -> Result<(JointDist, SolveReport)> {
    if constraints.is_empty() {
        return Err(Error::InvalidDistribution("no constraints".into()));
    }
    let q0 = JointDist::uniform(vars.to_vec())?;
    let cons = constraints
        .iter()
        .map(|c| resolve(vars, c))
        .collect::<Result<Vec<_>>>()?;
    let mut q = q0.mass().to_vec();
    if let Some(t) = trace.as_deref_mut() {
        t.push(q0.clone());
    }

    let mut res = residual(&q, &cons);
    let mut best = res;
    let mut stalled = 0;
    let mut sweeps = 0;
    while res > tol && sweeps < max_iter {
        sweeps += 1;
        for r in &cons {
            let cur = current_marginal(&q, r);
            for (qi, &k) in q.iter_mut().zip(&r.key) {
                *qi = if cur[k] > 0.0 {
                    *qi * r.table[k] / cur[k]
                } else {
                    0.0
                };
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(JointDist::from_parts(vars.to_vec(), q.clone()));
        }
        res = residual(&q, &cons);
        if res < best * (1.0 - 1e-12) {
            best = res;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_SWEEPS {
                return Err(Error::InconsistentConstraints(format!(
                    "marginal residual stuck at {res:.3e} after {sweeps} sweeps"
                )));
            }
        }
    }
    let total: f64 = q.iter().sum();
    if total > 0.0 && (total - 1.0).abs() > 8.0 * f64::EPSILON * q.len() as f64 {
        q.iter_mut().for_each(|v| *v /= total);
    }
    let fitted = JointDist::from_parts(vars.to_vec(), q);
    Ok((
        fitted.clone(),
        SolveReport {
            engine: Engine::Ipf,
            iterations: sweeps,
            objective: fitted.total_entropy(),
            certificate: res,
            converged: res <= tol,
            tolerance_used: tol,
        },
    ))
}
