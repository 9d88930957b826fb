use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::dist::{Alphabet, JointDist, Variable};
use crate::error::{Error, Result};

/// Variable names used by generated distributions, in order.
pub const NAMES: [&str; 4] = ["S", "Y", "Z", "U"];

/// A named family of distributions together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Pair marginals `P_a(s,y)`, `P_a(s,z)` with `Y ⊥ Z | S`, `0 ≤ a ≤ 1`.
    RedDiscontinuity {
        a: f64,
    },
    /// `S = (Y,Z)` with mass `(1-eps)/2` on `(0,0)` and `(1,1)` and `eps`
    /// on `(0,1)`, `0 ≤ eps ≤ 1`.
    GkDiscontinuity {
        eps: f64,
    },
    Xor,
    AndGate,
    /// `S = (Y,Z)` for independent uniform bits.
    Copy,
    /// `S = Y` with `Z` an independent uniform bit.
    Unq,
    /// `S = Y = Z` a uniform bit.
    Rdn,
    /// Dirichlet(`shape`) over the cells of a tensor with 3 or 4 variables
    /// of the given cardinalities.
    DirichletRandom {
        shape: f64,
        seed: u64,
        dims: Vec<usize>,
    },
}

impl FamilySpec {
    /// Dirichlet(1) over 2×2×2.
    pub fn dirichlet(seed: u64) -> Self {
        Self::dirichlet_dims(seed, &[2, 2, 2])
    }

    pub fn dirichlet_dims(seed: u64, dims: &[usize]) -> Self {
        FamilySpec::DirichletRandom {
            shape: 1.0,
            seed,
            dims: dims.to_vec(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            FamilySpec::RedDiscontinuity { a } => format!("red_discontinuity(a={a})"),
            FamilySpec::GkDiscontinuity { eps } => format!("gk_discontinuity(eps={eps})"),
            FamilySpec::Xor => "xor".into(),
            FamilySpec::AndGate => "and_gate".into(),
            FamilySpec::Copy => "copy".into(),
            FamilySpec::Unq => "unq".into(),
            FamilySpec::Rdn => "rdn".into(),
            FamilySpec::DirichletRandom { shape, seed, dims } => {
                let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                format!(
                    "dirichlet_random(shape={shape},seed={seed},dims={})",
                    dims.join("x")
                )
            }
        }
    }
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::ParameterOutOfRange(format!(
            "{name} = {v} outside [0, 1]"
        )));
    }
    Ok(())
}

fn vars(dims: &[usize]) -> Result<Vec<Variable>> {
    dims.iter()
        .zip(NAMES)
        .map(|(&n, name)| Variable::with_cardinality(name, n))
        .collect()
}

/// Three bits with `S = f(Y, Z)` for uniform independent `Y`, `Z`.
fn gate(f: impl Fn(usize, usize) -> usize) -> Result<JointDist> {
    let mut m = vec![0.0; 8];
    for y in 0..2 {
        for z in 0..2 {
            m[(f(y, z) * 2 + y) * 2 + z] = 0.25;
        }
    }
    JointDist::new(vars(&[2, 2, 2])?, m)
}

/// `S = (Y,Z)` from a law on the two bits.
fn copy_of(yz: [[f64; 2]; 2]) -> Result<JointDist> {
    let bit = Alphabet::range(2)?;
    let s = Variable::new("S", bit.product(&bit)?);
    let mut m = vec![0.0; 16];
    for y in 0..2 {
        for z in 0..2 {
            m[((2 * y + z) * 2 + y) * 2 + z] = yz[y][z];
        }
    }
    JointDist::new(
        vec![s, Variable::new("Y", bit.clone()), Variable::new("Z", bit)],
        m,
    )
}

pub fn generate(spec: &FamilySpec) -> Result<JointDist> {
    match spec {
        FamilySpec::RedDiscontinuity { a } => {
            unit_interval("a", *a)?;
            let h = a / 2.0;
            let sy = [[0.0, 0.25, 0.25], [h, 0.5 - h, 0.0]];
            let sz = [[h, 0.5 - h, 0.0], [0.0, 0.25, 0.25]];
            let mut m = Vec::with_capacity(18);
            for s in 0..2 {
                for y in 0..3 {
                    for z in 0..3 {
                        // P(s) = 1/2 for every a.
                        m.push(2.0 * sy[s][y] * sz[s][z]);
                    }
                }
            }
            JointDist::new(vars(&[2, 3, 3])?, m)
        }
        FamilySpec::GkDiscontinuity { eps } => {
            unit_interval("eps", *eps)?;
            let d = (1.0 - eps) / 2.0;
            copy_of([[d, *eps], [0.0, d]])
        }
        FamilySpec::Xor => gate(|y, z| y ^ z),
        FamilySpec::AndGate => gate(|y, z| y & z),
        FamilySpec::Copy => copy_of([[0.25; 2]; 2]),
        FamilySpec::Unq => gate(|y, _| y),
        FamilySpec::Rdn => JointDist::new(
            vars(&[2, 2, 2])?,
            vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        ),
        FamilySpec::DirichletRandom { shape, seed, dims } => {
            if !(3..=4).contains(&dims.len()) || dims.contains(&0) {
                return Err(Error::ParameterOutOfRange(format!(
                    "dims {dims:?}: need 3 or 4 positive cardinalities"
                )));
            }
            if !(shape.is_finite() && *shape > 0.0) {
                return Err(Error::ParameterOutOfRange(format!("shape = {shape}")));
            }
            let gamma =
                Gamma::new(*shape, 1.0).map_err(|e| Error::ParameterOutOfRange(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let n: usize = dims.iter().product();
            let mut m: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = m.iter().sum();
            m.iter_mut().for_each(|v| *v /= total);
            JointDist::new(vars(dims)?, m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn red_pair_marginal_matches_table() {
        let p = generate(&FamilySpec::RedDiscontinuity { a: 0.5 }).unwrap();
        let sy = p.marginal(&["S", "Y"]).unwrap();
        assert_eq!(sy.mass(), &[0.0, 0.25, 0.25, 0.25, 0.25, 0.0]);
        let sz = p.marginal(&["S", "Z"]).unwrap();
        assert_eq!(sz.mass(), &[0.25, 0.25, 0.0, 0.0, 0.25, 0.25]);
        assert!(
            p.conditional_mutual_information(&["Y"], &["Z"], &["S"])
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn gates_have_four_cells() {
        for spec in [
            FamilySpec::Xor,
            FamilySpec::AndGate,
            FamilySpec::Unq,
            FamilySpec::Copy,
        ] {
            let p = generate(&spec).unwrap();
            let cells: Vec<f64> = p.mass().iter().copied().filter(|&v| v > 0.0).collect();
            assert_eq!(cells, vec![0.25; 4], "{}", spec.label());
        }
    }

    #[test]
    fn gk_family_at_zero_is_two_blocks() {
        let p = generate(&FamilySpec::GkDiscontinuity { eps: 0.0 }).unwrap();
        assert_eq!(
            p.marginal(&["Y", "Z"]).unwrap().mass(),
            &[0.5, 0.0, 0.0, 0.5]
        );
        assert_eq!(p.variables()[0].alphabet.label(1), "(0,1)");
    }

    #[test]
    fn dirichlet_is_seeded_and_full_support() {
        let a = generate(&FamilySpec::dirichlet(7)).unwrap();
        assert_eq!(a, generate(&FamilySpec::dirichlet(7)).unwrap());
        assert_ne!(a, generate(&FamilySpec::dirichlet(8)).unwrap());
        assert!(a.has_full_support());
        let four = generate(&FamilySpec::dirichlet_dims(1, &[2, 2, 2, 2])).unwrap();
        assert_eq!(four.names(), NAMES);
    }

    #[test]
    fn parameter_ranges() {
        for spec in [
            FamilySpec::RedDiscontinuity { a: -0.1 },
            FamilySpec::GkDiscontinuity { eps: 1.5 },
            FamilySpec::DirichletRandom {
                shape: 0.0,
                seed: 0,
                dims: vec![2, 2, 2],
            },
            FamilySpec::DirichletRandom {
                shape: 1.0,
                seed: 0,
                dims: vec![2, 2],
            },
        ] {
            assert!(matches!(
                generate(&spec),
                Err(Error::ParameterOutOfRange(_))
            ));
        }
    }
}
