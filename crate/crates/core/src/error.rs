use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite result in {op} at index {index}")]
    NonFiniteResult { op: &'static str, index: usize },

    #[error("gradient entry {index} is not finite ({value})")]
    NonFiniteGradient { index: usize, value: f64 },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("standard deviation must be >= 0, got {0}")]
    InvalidStd(f64),

    #[error("fusion of two zero-variance beliefs with different means ({prior_mean} vs {obs_mean})")]
    DegenerateFusion { prior_mean: f64, obs_mean: f64 },

    #[error("variance must be finite and >= 0, got {0}")]
    InvalidVariance(f64),

    #[error("beta must lie in [0, 1), got {0}")]
    InvalidBeta(f64),

    #[error("invalid hyperparameter `{field}`: {reason}")]
    InvalidHyperparameter { field: &'static str, reason: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("step counter must be >= 1")]
    InvalidStepCount,

    #[error("eigenvalue {index} must be finite and > 0, got {value}")]
    InvalidEigenvalue { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ledger step {t} does not follow previous step {previous}")]
    OutOfOrderStep { t: u64, previous: u64 },

    #[error("ledger is empty")]
    EmptyLedger,

    #[error("series spans {decades:.2} decades; at least 2 are required")]
    InsufficientSpan { decades: f64 },

    #[error("invalid Langevin step: {0}")]
    InvalidStep(String),

    #[error("density exp(-f/D) is not integrable on the domain: {0}")]
    NonIntegrable(String),

    #[error("binning mismatch: {0}")]
    BinningMismatch(String),
}
