//! JSON reports written by every command.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use pidlab::harness::suites::SuiteReport;
use pidlab::measures::{InfoTerms, PidResult, ANCHOR_TOLERANCE};
use pidlab::SolverConfig;

use crate::error::{CliError, CliResult};

/// Bound on the identity residuals of a computed decomposition.
pub const RESIDUAL_TOLERANCE: f64 = 1e-7;
/// Bound on the consistency residual of a UI construction.
pub const CONSTRUCTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub solver: SolverConfig,
    pub residual: f64,
    pub anchor: f64,
}

impl Tolerances {
    pub fn new(solver: SolverConfig) -> Self {
        Self {
            solver,
            residual: RESIDUAL_TOLERANCE,
            anchor: ANCHOR_TOLERANCE,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportFile<B: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub tolerances: Tolerances,
    #[serde(flatten)]
    pub body: B,
}

impl<B: Serialize> ReportFile<B> {
    pub fn new(command: &'static str, input: Option<&[u8]>, cfg: SolverConfig, body: B) -> Self {
        Self {
            tool: "pidlab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            input_sha256: input.map(sha256_hex),
            tolerances: Tolerances::new(cfg),
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Roles {
    pub target: String,
    pub sources: [String; 2],
}

/// A decomposition with its identity residuals.
#[derive(Debug, Serialize)]
pub struct ResultEntry {
    #[serde(flatten)]
    pub result: PidResult,
    pub residuals: [f64; 3],
    pub converged: bool,
}

impl ResultEntry {
    pub fn new(result: PidResult, terms: &InfoTerms) -> Self {
        Self {
            residuals: result.residuals(terms),
            converged: result.converged(),
            result,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Skipped {
    pub measure: String,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct ComputeBody {
    pub roles: Roles,
    pub information: InfoTerms,
    pub results: Vec<ResultEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<Skipped>,
}

#[derive(Debug, Serialize)]
pub struct ConstructionBody {
    pub roles: Roles,
    pub delta_y: f64,
    pub delta_z: f64,
    pub information: InfoTerms,
    pub result: ResultEntry,
    /// `I(S;Y) + UI_z - I(S;Z) - UI_y`.
    pub consistency_residual: f64,
    pub consistency_tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyBody {
    #[serde(flatten)]
    pub report: SuiteReport,
}

/// Writes `text` to `path` through a sibling temporary file, or to stdout
/// when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    let Some(path) = path else {
        print!("{text}");
        return Ok(());
    };
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, text).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
