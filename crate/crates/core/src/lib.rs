//! Bivariate partial information decompositions of finite joint
//! distributions `P(S, Y, Z)`.

pub mod config;
pub mod dist;
pub mod error;
pub mod harness;
pub mod measures;
pub mod opt;

pub use config::SolverConfig;
pub use dist::{Alphabet, Channel, JointDist, Variable};
pub use error::{Error, Result};
pub use measures::{Measure, PidResult};
