use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid privacy budget: {0}")]
    InvalidBudget(String),

    #[error("sensitivity must be positive and finite, got {0}")]
    InvalidSensitivity(f64),

    #[error("noise scale must be positive and finite, got {0}")]
    InvalidSigma(f64),

    #[error("delta = 0 cannot be met by any finite Gaussian noise")]
    ZeroDelta,

    #[error("calibration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("threshold t = {t} is outside [1, {max}]")]
    ThresholdOutOfRange { t: usize, max: usize },

    #[error("instance with n = {n} exceeds the oracle limit of {limit} parties")]
    InstanceTooLarge { n: usize, limit: usize },

    #[error("LP solver failure: {0}")]
    Solver(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("singular system in regression solve")]
    Singular,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid composition request: {0}")]
    InvalidComposition(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
