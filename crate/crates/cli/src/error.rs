use thiserror::Error;

use pidlab::opt::SolveReport;

/// Everything that ends a command early, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("measure `{measure}` failed: {message}")]
    Solver {
        measure: String,
        message: String,
        report: Option<SolveReport>,
    },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Solver { .. } => 4,
            CliError::VerificationFailed(_) => 5,
        }
    }

    pub fn validation(e: pidlab::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
