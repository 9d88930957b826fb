use std::f64::consts::LN_2;

use super::{roles, InfoTerms, Measure, PidResult};
use crate::config::SolverConfig;
use crate::dist::{JointDist, SUPPORT_THRESHOLD};
use crate::error::{Error, Result};
use crate::opt::{minimize_scalar_convex, SolveReport};

const POLISH_STEPS: usize = 50;

/// The information-geometric projection of `P` onto the exponential family
/// `P^(t) ∝ P(y,z) P(s|y)^t P(s|z)^(1-t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IgProjection {
    pub t_star: f64,
    /// `P^(t*)`, the minimizer of `D(P || P^(t))`.
    pub p_star: JointDist,
    /// `P^(0)`, the Markov chain `S - Z - Y`.
    pub p0: JointDist,
    /// `P^(1)`, the Markov chain `S - Y - Z`.
    pub p1: JointDist,
    pub report: SolveReport,
}

/// Per-cell log terms of the family; members are evaluated in log space.
struct Family {
    log_yz: Vec<f64>,
    log_sy: Vec<f64>,
    log_sz: Vec<f64>,
    p: Vec<f64>,
}

impl Family {
    fn new(p: &JointDist) -> Result<Self> {
        let [s, y, z] = roles(p)?;
        let yz = p.marginal(&[y, z])?;
        let sy = p.marginal(&[s, y])?;
        let sz = p.marginal(&[s, z])?;
        let (py, pz) = (p.marginal(&[y])?, p.marginal(&[z])?);
        let shape = p.shape();
        let mut f = Family {
            log_yz: Vec::with_capacity(p.len()),
            log_sy: Vec::with_capacity(p.len()),
            log_sz: Vec::with_capacity(p.len()),
            p: p.mass().to_vec(),
        };
        for si in 0..shape[0] {
            for yi in 0..shape[1] {
                for zi in 0..shape[2] {
                    f.log_yz.push(yz.get(&[yi, zi]).ln());
                    f.log_sy.push((sy.get(&[si, yi]) / py.get(&[yi])).ln());
                    f.log_sz.push((sz.get(&[si, zi]) / pz.get(&[zi])).ln());
                }
            }
        }
        Ok(f)
    }

    fn member(&self, t: f64) -> Vec<f64> {
        let logs: Vec<f64> = (0..self.p.len())
            .map(|i| self.log_yz[i] + t * self.log_sy[i] + (1.0 - t) * self.log_sz[i])
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut q: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= total);
        q
    }

    /// `D(P || P^(t))` in bits.
    fn divergence(&self, t: f64) -> f64 {
        let q = self.member(t);
        self.p
            .iter()
            .zip(&q)
            .map(|(a, b)| a * (a / b).ln())
            .sum::<f64>()
            / LN_2
    }

    /// First and second derivative of the divergence. With
    /// `r = ln P(s|y) - ln P(s|z)` these are the mean difference
    /// `E_{P^(t)} r - E_P r` and the variance of `r` under `P^(t)`.
    fn derivatives(&self, t: f64) -> (f64, f64) {
        let q = self.member(t);
        let r: Vec<f64> = self
            .log_sy
            .iter()
            .zip(&self.log_sz)
            .map(|(a, b)| a - b)
            .collect();
        let eq: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
        let ep: f64 = self.p.iter().zip(&r).map(|(a, b)| a * b).sum();
        let var: f64 = q.iter().zip(&r).map(|(a, b)| a * (b - eq).powi(2)).sum();
        ((eq - ep) / LN_2, var / LN_2)
    }
}

fn require_full_support(p: &JointDist) -> Result<()> {
    let min_mass = p.min_mass();
    if min_mass <= SUPPORT_THRESHOLD {
        return Err(Error::NotFullSupport { min_mass });
    }
    Ok(())
}

/// Locates `t*` by Brent's method and sharpens it with Newton steps on the
/// analytic derivatives.
pub fn ig_projection(p: &JointDist, cfg: &SolverConfig) -> Result<IgProjection> {
    require_full_support(p)?;
    let fam = Family::new(p)?;
    let (mut t, mut report) =
        minimize_scalar_convex(|t| fam.divergence(t), (-1.0, 2.0), cfg.scalar_tol, 40)?;
    let (mut d1, _) = fam.derivatives(t);
    for _ in 0..POLISH_STEPS {
        let (_, d2) = fam.derivatives(t);
        if !(d2 > 0.0) {
            break;
        }
        let next = t - d1 / d2;
        let (nd1, _) = fam.derivatives(next);
        if !(nd1.abs() < d1.abs()) {
            break;
        }
        t = next;
        d1 = nd1;
    }
    report.objective = fam.divergence(t);
    let build = |t: f64| JointDist::new(p.variables().to_vec(), fam.member(t));
    Ok(IgProjection {
        t_star: t,
        p_star: build(t)?,
        p0: build(0.0)?,
        p1: build(1.0)?,
        report,
    })
}

/// `CI = D(P || P*)`, `UI_y = D(P* || P^(0))`, `UI_z = D(P* || P^(1))` and
/// `SI = I(S;Y) - UI_y`. Needs a fully supported `P`.
pub fn decomp_ig(p: &JointDist, cfg: &SolverConfig) -> Result<PidResult> {
    let proj = ig_projection(p, cfg)?;
    let terms = InfoTerms::of(p)?;
    let ui_y = proj.p_star.kl_divergence(&proj.p0)?;
    Ok(PidResult {
        measure: Measure::Ig.into(),
        si: terms.sy - ui_y,
        ui_y,
        ui_z: proj.p_star.kl_divergence(&proj.p1)?,
        ci: p.kl_divergence(&proj.p_star)?,
        diagnostics: vec![proj.report],
    })
}
