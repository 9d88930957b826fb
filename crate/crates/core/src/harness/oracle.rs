use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::JointDist;
use crate::error::{Error, Result};

const GRID_STEP: f64 = 1e-4;
const GOLDEN_ITERS: usize = 80;
const SWEEPS: usize = 200;

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `Δ_P` for binary `S, Y, Z`: each `s`-slice is a 2×2 table with fixed
/// margins, so it is fixed by its `(0,0)` entry `t_s` in `[lo_s, hi_s]`.
struct Slices {
    rows: [[f64; 2]; 2],
    cols: [[f64; 2]; 2],
    bounds: [(f64, f64); 2],
    /// `H(S,Z) - H(Z)`, constant over the polytope.
    offset: f64,
}

impl Slices {
    fn new(p: &JointDist) -> Self {
        let sy = p.marginal(&["S", "Y"]).expect("checked names");
        let sz = p.marginal(&["S", "Z"]).expect("checked names");
        let z = p.marginal(&["Z"]).expect("checked names");
        let mut rows = [[0.0; 2]; 2];
        let mut cols = [[0.0; 2]; 2];
        for s in 0..2 {
            for k in 0..2 {
                rows[s][k] = sy.get(&[s, k]);
                cols[s][k] = sz.get(&[s, k]);
            }
        }
        let bounds = [0, 1].map(|s| {
            let lo = (rows[s][0] - cols[s][1]).max(0.0);
            let hi = rows[s][0].min(cols[s][0]);
            (lo, hi.max(lo))
        });
        let h = |m: &[f64]| -m.iter().map(|&x| xlog2x(x)).sum::<f64>();
        Self {
            rows,
            cols,
            bounds,
            offset: h(sz.mass()) - h(z.mass()),
        }
    }

    /// `I_Q(S;Y|Z) = H(S,Z) + H(Y,Z) - H(S,Y,Z) - H(Z)`.
    fn objective(&self, t: [f64; 2]) -> f64 {
        let mut neg_syz = 0.0;
        let mut yz = [[0.0; 2]; 2];
        for s in 0..2 {
            let q00 = t[s];
            let q01 = self.rows[s][0] - q00;
            let q10 = self.cols[s][0] - q00;
            let q11 = self.rows[s][1] - q10;
            for (y, z, q) in [(0, 0, q00), (0, 1, q01), (1, 0, q10), (1, 1, q11)] {
                let q = q.max(0.0);
                neg_syz += xlog2x(q);
                yz[y][z] += q;
            }
        }
        let neg_yz: f64 = yz.iter().flatten().map(|&x| xlog2x(x)).sum();
        self.offset - neg_yz + neg_syz
    }
}

/// Golden-section minimum of a unimodal function on `[lo, hi]`.
fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    [(lo, f(lo)), (hi, f(hi)), (x1, f1), (x2, f2)]
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty")
}

/// Grid scan at `GRID_STEP` resolution followed by golden refinement
/// between the neighbours of the best grid point.
fn scan(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = ((hi - lo) / GRID_STEP).ceil().max(1.0) as usize;
    let at = |i: usize| {
        if i >= n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        }
    };
    let best = (0..=n)
        .map(|i| (i, f(at(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty")
        .0;
    golden(f, at(best.saturating_sub(1)), at((best + 1).min(n)))
}

/// Independent estimate of `min over Q in Δ_P of I_Q(S;Y|Z)` for binary
/// `S, Y, Z`, in bits.
///
/// The two slice parameters are optimized by nested golden-section search
/// (the partial minimum of a convex function is convex) and by coordinate
/// descent from `starts` seeded random points, each coordinate solved by a
/// fine grid scan plus golden refinement. The best value found is returned.
pub fn broja_oracle(p: &JointDist, starts: usize, seed: u64) -> Result<f64> {
    if p.names() != ["S", "Y", "Z"] || p.shape() != [2, 2, 2] {
        return Err(Error::ShapeMismatch(format!(
            "oracle needs binary (S, Y, Z), got {:?} with shape {:?}",
            p.names(),
            p.shape()
        )));
    }
    let sl = Slices::new(p);
    let [(lo0, hi0), (lo1, hi1)] = sl.bounds;

    let inner = |t0: f64| golden(|t1| sl.objective([t0, t1]), lo1, hi1).1;
    let mut best = golden(inner, lo0, hi0).1;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..starts {
        let mut t = [rng.random_range(lo0..=hi0), rng.random_range(lo1..=hi1)];
        let mut value = sl.objective(t);
        for sweep in 0..SWEEPS {
            let before = value;
            for k in 0..2 {
                let (lo, hi) = sl.bounds[k];
                let f = |x: f64| {
                    let mut u = t;
                    u[k] = x;
                    sl.objective(u)
                };
                let (x, v) = if sweep == 0 {
                    scan(f, lo, hi)
                } else {
                    golden(f, lo, hi)
                };
                if v <= value {
                    t[k] = x;
                    value = v;
                }
            }
            if before - value <= 1e-15 {
                break;
            }
        }
        best = best.min(value);
    }
    Ok(best.max(0.0))
}
