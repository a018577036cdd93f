use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no data")]
    NoData,

    #[error("degenerate threshold: m must be at least 2 (got {0})")]
    DegenerateThreshold(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance not PSD (failed with jitter {jitter:e})")]
    CovarianceNotPsd { jitter: f64 },

    #[error("exact simulation budget exceeded after {draws} Gaussian draws")]
    ExactBudgetExceeded { draws: usize },

    #[error("truncation radius too small: {0}")]
    TruncationRadiusTooSmall(String),

    #[error("spectral density not positive: f = {value:e} at frequency ({w1}, {w2})")]
    SpectralDensityNotPositive { value: f64, w1: f64, w2: f64 },

    #[error("objective not finite at theta = {theta}: {value}")]
    NonFiniteObjective { theta: f64, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
