use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use super::{line_search, transport_vertex, Engine, SolveReport};
use crate::dist::{JointDist, Variable, SUPPORT_THRESHOLD};
use crate::error::{Error, Result};

/// Pair marginals agree on `P(s)` within this much.
const CONSISTENCY_TOL: f64 = 1e-12;

/// Weight kept on the starting point so every allowed cell stays positive
/// and the gradient `log Q(s|y,z)` stays finite. Costs at most
/// `ANCHOR * log2 |S|` bits of objective.
const ANCHOR: f64 = 1e-12;

/// Newton steps per barrier parameter.
const MAX_NEWTON: usize = 100;

/// Joint distributions over `(S, Y, Z)` with prescribed `(S,Y)` and `(S,Z)`
/// marginals. For each `s` the slice is a transportation polytope with row
/// sums `P(s, .)` over `Y` and column sums `P(s, .)` over `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPolytope {
    vars: [Variable; 3],
    sy: Vec<f64>,
    sz: Vec<f64>,
    s: Vec<f64>,
}

impl DeltaPolytope {
    /// Polytope through a 3-variable distribution ordered `(S, Y, Z)`.
    pub fn from_dist(p: &JointDist) -> Result<Self> {
        if p.arity() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "expected 3 variables (S, Y, Z), got {}",
                p.arity()
            )));
        }
        let names = p.names();
        let sy = p.marginal(&[names[0], names[1]])?.mass().to_vec();
        let sz = p.marginal(&[names[0], names[2]])?.mass().to_vec();
        let v = p.variables();
        Self::from_marginals(v[0].clone(), v[1].clone(), v[2].clone(), sy, sz)
    }

    /// Polytope from row-major tables `P(s,y)` and `P(s,z)`.
    pub fn from_marginals(
        s: Variable,
        y: Variable,
        z: Variable,
        sy: Vec<f64>,
        sz: Vec<f64>,
    ) -> Result<Self> {
        let (ns, ny, nz) = (s.alphabet.len(), y.alphabet.len(), z.alphabet.len());
        if sy.len() != ns * ny || sz.len() != ns * nz {
            return Err(Error::ShapeMismatch(format!(
                "pair tables of length {} and {} for alphabets {ns}x{ny}x{nz}",
                sy.len(),
                sz.len()
            )));
        }
        if let Some(v) = sy.iter().chain(&sz).find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "pair marginal entry {v}"
            )));
        }
        let s_from_y: Vec<f64> = (0..ns)
            .map(|i| sy[i * ny..(i + 1) * ny].iter().sum())
            .collect();
        let s_from_z: Vec<f64> = (0..ns)
            .map(|i| sz[i * nz..(i + 1) * nz].iter().sum())
            .collect();
        for (i, (a, b)) in s_from_y.iter().zip(&s_from_z).enumerate() {
            if (a - b).abs() > CONSISTENCY_TOL {
                return Err(Error::InconsistentConstraints(format!(
                    "P(S={}) is {a} from (S,Y) but {b} from (S,Z)",
                    s.alphabet.label(i)
                )));
            }
        }
        Ok(Self {
            vars: [s, y, z],
            sy,
            sz,
            s: s_from_y,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn sy_marginal(&self) -> &[f64] {
        &self.sy
    }

    pub fn sz_marginal(&self) -> &[f64] {
        &self.sz
    }

    pub fn s_marginal(&self) -> &[f64] {
        &self.s
    }

    fn dims(&self) -> (usize, usize, usize) {
        (
            self.vars[0].alphabet.len(),
            self.vars[1].alphabet.len(),
            self.vars[2].alphabet.len(),
        )
    }

    /// The same polytope with the roles of `Y` and `Z` exchanged.
    pub fn swapped(&self) -> DeltaPolytope {
        let [s, y, z] = self.vars.clone();
        DeltaPolytope {
            vars: [s, z, y],
            sy: self.sz.clone(),
            sz: self.sy.clone(),
            s: self.s.clone(),
        }
    }

    /// `P(s,y) P(s,z) / P(s)`, the member under which `Y` and `Z` are
    /// conditionally independent given `S`.
    pub fn markov_point(&self) -> JointDist {
        let (ns, ny, nz) = self.dims();
        let mut mass = vec![0.0; ns * ny * nz];
        for s in 0..ns {
            if self.s[s] <= SUPPORT_THRESHOLD {
                continue;
            }
            for y in 0..ny {
                for z in 0..nz {
                    mass[(s * ny + y) * nz + z] =
                        self.sy[s * ny + y] * self.sz[s * nz + z] / self.s[s];
                }
            }
        }
        JointDist::from_parts(self.vars.to_vec(), mass)
    }

    /// Largest absolute deviation of `q`'s pair marginals from the polytope's.
    pub fn residual(&self, q: &JointDist) -> Result<f64> {
        let (ns, ny, nz) = self.dims();
        if q.shape() != [ns, ny, nz] {
            return Err(Error::ShapeMismatch(format!(
                "distribution of shape {:?} for polytope {ns}x{ny}x{nz}",
                q.shape()
            )));
        }
        let m = q.mass();
        let mut worst: f64 = 0.0;
        for s in 0..ns {
            for y in 0..ny {
                let row: f64 = (0..nz).map(|z| m[(s * ny + y) * nz + z]).sum();
                worst = worst.max((row - self.sy[s * ny + y]).abs());
            }
            for z in 0..nz {
                let col: f64 = (0..ny).map(|y| m[(s * ny + y) * nz + z]).sum();
                worst = worst.max((col - self.sz[s * nz + z]).abs());
            }
        }
        Ok(worst)
    }
}

/// One `s`-slice restricted to the rows and columns with positive mass.
struct Slice {
    rows: Vec<usize>,
    cols: Vec<usize>,
    supply: Vec<f64>,
    demand: Vec<f64>,
    offset: usize,
}

impl Slice {
    fn len(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Active set of one slice: vertices and convex weights.
struct ActiveSet {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl ActiveSet {
    fn point(&self, n: usize) -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            for (yi, ai) in y.iter_mut().zip(a) {
                *yi += w * ai;
            }
        }
        y
    }
}

/// The free cells of the polytope, grouped by slice.
struct Layout {
    slices: Vec<Slice>,
    /// `(y,z)` column of each cell.
    col_of: Vec<usize>,
    /// Position of each cell in the full `(S,Y,Z)` tensor.
    full_of: Vec<usize>,
    n_cols: usize,
}

impl Layout {
    fn new(poly: &DeltaPolytope) -> Self {
        let (ns, ny, nz) = poly.dims();
        let mut slices = Vec::new();
        let mut col_of = Vec::new();
        let mut full_of = Vec::new();
        for s in 0..ns {
            if poly.s[s] <= SUPPORT_THRESHOLD {
                continue;
            }
            let rows: Vec<usize> = (0..ny)
                .filter(|&y| poly.sy[s * ny + y] > SUPPORT_THRESHOLD)
                .collect();
            let cols: Vec<usize> = (0..nz)
                .filter(|&z| poly.sz[s * nz + z] > SUPPORT_THRESHOLD)
                .collect();
            let supply: Vec<f64> = rows.iter().map(|&y| poly.sy[s * ny + y]).collect();
            let mut demand: Vec<f64> = cols.iter().map(|&z| poly.sz[s * nz + z]).collect();
            // Make the slice totals agree exactly for the transport solver.
            let ratio = supply.iter().sum::<f64>() / demand.iter().sum::<f64>();
            demand.iter_mut().for_each(|d| *d *= ratio);
            let offset = col_of.len();
            for &y in &rows {
                for &z in &cols {
                    col_of.push(y * nz + z);
                    full_of.push((s * ny + y) * nz + z);
                }
            }
            slices.push(Slice {
                rows,
                cols,
                supply,
                demand,
                offset,
            });
        }
        Self {
            slices,
            col_of,
            full_of,
            n_cols: ny * nz,
        }
    }

    fn len(&self) -> usize {
        self.col_of.len()
    }

    fn col_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_cols];
        for (xi, &k) in x.iter().zip(&self.col_of) {
            c[k] += xi;
        }
        c
    }

    /// `sum_c x_c log2(x_c / X_col(c))`, i.e. `-H(S|Y,Z)`.
    fn objective(&self, x: &[f64]) -> f64 {
        let cols = self.col_sums(x);
        x.iter()
            .zip(&self.col_of)
            .filter(|(xi, _)| **xi > 0.0)
            .map(|(xi, &k)| xi * (xi / cols[k]).log2())
            .sum()
    }

    /// Gradient in bits, per-slice linear minimizers and the duality gap.
    fn linearize(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
        let cols = self.col_sums(x);
        let grad: Vec<f64> = x
            .iter()
            .zip(&self.col_of)
            .map(|(xi, &k)| (xi / cols[k]).log2())
            .collect();
        let vertices: Vec<Vec<f64>> = self
            .slices
            .iter()
            .map(|sl| transport_vertex(&grad[sl.range()], &sl.supply, &sl.demand))
            .collect();
        let gap: f64 = self
            .slices
            .iter()
            .zip(&vertices)
            .map(|(sl, v)| {
                let g = &grad[sl.range()];
                dot(g, &x[sl.range()]) - dot(g, v)
            })
            .sum();
        (grad, vertices, gap)
    }

    /// Equality constraints of the slices: all row sums and all but the
    /// last column sum (the dropped one is implied).
    fn constraint_rows(&self) -> Vec<Vec<usize>> {
        let mut rows = Vec::new();
        for sl in &self.slices {
            let nc = sl.cols.len();
            for r in 0..sl.rows.len() {
                rows.push((0..nc).map(|c| sl.offset + r * nc + c).collect());
            }
            for c in 0..nc.saturating_sub(1) {
                rows.push((0..sl.rows.len()).map(|r| sl.offset + r * nc + c).collect());
            }
        }
        rows
    }
}

/// Log-barrier path following with Newton steps in scaled coordinates
/// `dx = diag(x) du`. Leaves `x` near the optimum with a duality gap of
/// roughly `n * mu_final`. Returns the number of Newton steps taken.
fn barrier_phase(layout: &Layout, x: &mut [f64], tol: f64) -> usize {
    let n = layout.len();
    if n == 0 {
        return 0;
    }
    let cons = layout.constraint_rows();
    let m = cons.len();
    // Gap bound n * mu (nats) must sit well inside tol (bits).
    let mu_final = 0.1 * tol * LN_2 / n as f64;
    let mut mu = 0.1;
    let mut steps = 0;
    let barrier_value = |x: &[f64], mu: f64| -> f64 {
        layout.objective(x) * LN_2 - mu * x.iter().map(|v| v.ln()).sum::<f64>()
    };
    loop {
        for _ in 0..MAX_NEWTON {
            let cols = layout.col_sums(x);
            // Scaled gradient x * (grad f) - mu and scaled Hessian
            // diag(x) - sum_col (x_col x_col^T) / X_col + mu I.
            let g: Vec<f64> = x
                .iter()
                .zip(&layout.col_of)
                .map(|(xi, &k)| xi * (xi / cols[k]).ln() - mu)
                .collect();
            let dim = n + m;
            let mut kkt = DMatrix::<f64>::zeros(dim, dim);
            for i in 0..n {
                kkt[(i, i)] = x[i] + mu;
                for j in 0..n {
                    if layout.col_of[i] == layout.col_of[j] {
                        kkt[(i, j)] -= x[i] * x[j] / cols[layout.col_of[i]];
                    }
                }
            }
            for (r, cells) in cons.iter().enumerate() {
                for &c in cells {
                    kkt[(n + r, c)] = x[c];
                    kkt[(c, n + r)] = x[c];
                }
            }
            let mut rhs = DVector::<f64>::zeros(dim);
            for i in 0..n {
                rhs[i] = -g[i];
            }
            let Some(sol) = kkt.lu().solve(&rhs) else {
                return steps;
            };
            steps += 1;
            let du: Vec<f64> = (0..n).map(|i| sol[i]).collect();
            let decrement = -dot(&g, &du);
            if !(decrement > 1e-15 * mu.max(1e-3)) {
                break;
            }
            // Fraction-to-boundary rule, then Armijo backtracking.
            let mut t: f64 = 1.0;
            for &d in &du {
                if d < 0.0 {
                    t = t.min(-0.99 / d);
                }
            }
            let f0 = barrier_value(x, mu);
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(&du)
                    .map(|(xi, d)| xi * (1.0 + t * d))
                    .collect();
                if trial.iter().all(|v| *v > 0.0)
                    && barrier_value(&trial, mu) <= f0 - 0.25 * t * decrement
                {
                    x.copy_from_slice(&trial);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if mu <= mu_final {
            return steps;
        }
        mu = (mu * 0.1).max(mu_final);
    }
}

/// Away-step Frank-Wolfe from `start`. A fixed `ANCHOR` share of `start`
/// keeps every cell positive. Returns the iterate, its gap, the number of
/// iterations and whether the gap reached `tol`.
fn afw_phase(
    layout: &Layout,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, usize, bool) {
    let slices = &layout.slices;
    let n = layout.len();
    let mut sets: Vec<ActiveSet> = slices
        .iter()
        .map(|sl| ActiveSet {
            atoms: vec![start[sl.range()].to_vec()],
            weights: vec![1.0],
        })
        .collect();
    let assemble = |sets: &[ActiveSet]| -> Vec<f64> {
        let mut y = Vec::with_capacity(n);
        for (set, sl) in sets.iter().zip(slices) {
            y.extend(set.point(sl.len()));
        }
        y
    };
    let mix = |y: &[f64]| -> Vec<f64> {
        start
            .iter()
            .zip(y)
            .map(|(a, b)| ANCHOR * a + (1.0 - ANCHOR) * b)
            .collect()
    };

    let mut iterations = 0;
    let mut y = start.to_vec();
    loop {
        let x = mix(&y);
        let (grad, vertices, gap) = layout.linearize(&x);
        if gap <= tol {
            return (x, gap, iterations, true);
        }
        if iterations >= max_iter {
            return (x, gap, iterations, false);
        }
        iterations += 1;

        let v: Vec<f64> = vertices.concat();
        let fw_gap = dot(&grad, &y) - dot(&grad, &v);
        // Per slice: the active atom with the largest linear cost.
        let mut away_gap = 0.0;
        let mut away_idx = Vec::with_capacity(sets.len());
        for (set, sl) in sets.iter().zip(slices) {
            let g = &grad[sl.range()];
            let (best, val) = set
                .atoms
                .iter()
                .enumerate()
                .map(|(i, a)| (i, dot(g, a)))
                .fold((0, f64::NEG_INFINITY), |acc, cur| {
                    if cur.1 > acc.1 {
                        cur
                    } else {
                        acc
                    }
                });
            if set.atoms.len() > 1 {
                away_gap += val - dot(g, &y[sl.range()]);
            }
            away_idx.push(best);
        }

        let use_away = away_gap > fw_gap;
        let mut dy = vec![0.0; n];
        let mut gamma_max = if use_away { f64::INFINITY } else { 1.0 };
        let mut limits = vec![f64::INFINITY; sets.len()];
        for (b, (set, sl)) in sets.iter().zip(slices).enumerate() {
            let r = sl.range();
            if use_away {
                if set.atoms.len() == 1 {
                    continue;
                }
                let a = &set.atoms[away_idx[b]];
                let w = set.weights[away_idx[b]];
                limits[b] = w / (1.0 - w);
                gamma_max = gamma_max.min(limits[b]);
                for (k, i) in r.enumerate() {
                    dy[i] = y[i] - a[k];
                }
            } else {
                for (k, i) in r.enumerate() {
                    dy[i] = vertices[b][k] - y[i];
                }
            }
        }
        let dx: Vec<f64> = dy.iter().map(|d| (1.0 - ANCHOR) * d).collect();
        let cols = layout.col_sums(&x);
        let dcols = layout.col_sums(&dx);
        let gamma = line_search(gamma_max, |g| {
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for ((xi, di), &k) in x.iter().zip(&dx).zip(&layout.col_of) {
                if *di == 0.0 {
                    continue;
                }
                let xv = xi + g * di;
                let cv = cols[k] + g * dcols[k];
                if xv <= 0.0 || cv <= 0.0 {
                    return (f64::INFINITY, f64::INFINITY);
                }
                d1 += di * (xv / cv).ln();
                d2 += di * di / xv;
            }
            for (c, dc) in cols.iter().zip(&dcols) {
                if *dc != 0.0 {
                    d2 -= dc * dc / (c + g * dc);
                }
            }
            (d1 / LN_2, d2 / LN_2)
        });
        if gamma <= 0.0 {
            // No descent is possible at machine precision.
            return (x, gap, iterations, false);
        }

        for (b, set) in sets.iter_mut().enumerate() {
            if use_away {
                if set.atoms.len() == 1 {
                    continue;
                }
                let a = away_idx[b];
                set.weights.iter_mut().for_each(|w| *w *= 1.0 + gamma);
                set.weights[a] -= gamma;
                // Drop the atom only in the slice whose bound was binding.
                if gamma >= limits[b] || set.weights[a] <= 0.0 {
                    set.weights[a] = 0.0;
                }
            } else {
                set.weights.iter_mut().for_each(|w| *w *= 1.0 - gamma);
                if gamma >= 1.0 {
                    set.weights.iter_mut().for_each(|w| *w = 0.0);
                }
                match set.atoms.iter().position(|a| *a == vertices[b]) {
                    Some(i) => set.weights[i] += gamma,
                    None => {
                        set.atoms.push(vertices[b].clone());
                        set.weights.push(gamma);
                    }
                }
            }
            prune(set);
        }
        y = assemble(&sets);
    }
}

/// Minimizes `I_Q(S;Y|Z)` over `Q` in the polytope.
///
/// Starting from the Markov point, a log-barrier Newton phase brings the
/// iterate close to the optimum; away-step Frank-Wolfe then runs until the
/// duality gap is below `tol`. Every linear subproblem is solved exactly
/// per slice by the transportation simplex, so the reported gap (in bits)
/// is a valid bound on the distance to the optimal objective. Hitting
/// `max_iter` returns the last iterate with `converged = false`.
pub fn minimize_cmi_over_delta(
    poly: &DeltaPolytope,
    tol: f64,
    max_iter: usize,
) -> Result<(JointDist, SolveReport)> {
    let (ns, ny, nz) = poly.dims();
    let layout = Layout::new(poly);
    let markov = poly.markov_point();
    let mut x: Vec<f64> = layout.full_of.iter().map(|&i| markov.mass()[i]).collect();
    let newton_steps = barrier_phase(&layout, &mut x, tol);
    let (x, gap, fw_steps, converged) = afw_phase(&layout, &x, tol, max_iter);

    let mut mass = vec![0.0; ns * ny * nz];
    for (xi, &i) in x.iter().zip(&layout.full_of) {
        mass[i] = *xi;
    }
    let q = JointDist::from_parts(poly.vars.to_vec(), mass);
    let names = q.names();
    let objective = q.conditional_mutual_information(&[names[0]], &[names[1]], &[names[2]])?;
    Ok((
        q,
        SolveReport {
            engine: Engine::FrankWolfe,
            iterations: newton_steps + fw_steps,
            objective: objective.max(0.0),
            certificate: gap,
            converged,
            tolerance_used: tol,
        },
    ))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Drops zero-weight atoms and renormalizes the survivors.
fn prune(set: &mut ActiveSet) {
    let mut k = 0;
    while k < set.atoms.len() {
        if set.weights[k] <= 0.0 {
            set.atoms.swap_remove(k);
            set.weights.swap_remove(k);
        } else {
            k += 1;
        }
    }
    let total: f64 = set.weights.iter().sum();
    set.weights.iter_mut().for_each(|w| *w /= total);
}
