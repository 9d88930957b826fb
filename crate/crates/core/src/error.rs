use thiserror::Error;

/// Errors raised by distribution handling, the solvers and the measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative probability mass {value:e} at cell {cell}")]
    NegativeMass { cell: usize, value: f64 },

    #[error("distribution sums to {sum}, outside tolerance {tol:e}")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable groups overlap on `{0}`")]
    OverlappingGroups(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("incomplete pairing: {0}")]
    PairingIncomplete(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("no bracket enclosing a minimum found after {expansions} expansions")]
    BracketFailure { expansions: usize },

    #[error("target support is not covered by the union of atom supports")]
    InfeasibleSupport,

    #[error("inconsistent marginal constraints: {0}")]
    InconsistentConstraints(String),

    #[error("outcome `{0}` has zero probability")]
    ZeroProbabilityOutcome(String),

    #[error("measure requires full support; smallest cell mass is {min_mass:e}")]
    NotFullSupport { min_mass: f64 },

    #[error("unique-information pair violates the consistency condition by {defect:e} bits")]
    InconsistentAnchor { defect: f64 },

    #[error("delta for {side} is {value} bits, admissible range is [0, {bound}]")]
    DeltaOutOfRange {
        side: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
