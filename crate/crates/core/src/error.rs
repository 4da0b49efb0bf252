use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero frequency vector")]
    ZeroVector,
    #[error("index {0:?} is not sign-normalized (first nonzero entry must be positive)")]
    NotNormalized(Vec<i64>),
    #[error("frequency l1-norm {norm} exceeds the supported cap {cap}")]
    FrequencyTooLarge { norm: u64, cap: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("unsupported dimension {0} for this operation")]
    UnsupportedDimension(usize),
    #[error("quadrature tolerance unreachable: {0}")]
    ToleranceUnreachable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("network parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
