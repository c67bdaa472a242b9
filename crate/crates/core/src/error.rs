use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("affine chart needs a nonzero direction")]
    ZeroDirection,

    #[error("potential error: {0}")]
    Potential(String),

    #[error("chart error: {0}")]
    Chart(String),

    #[error("morse search failed after {attempts} attempts: {reason}")]
    MorseSearch { attempts: usize, reason: String },

    #[error("separation error: {0}")]
    Separation(String),

    #[error("oscillation guard violated: {available} nodes per axis, {required:.1} required")]
    Oscillation { required: f64, available: usize },

    #[error("degenerate critical point: {0}")]
    Degenerate(String),

    #[error("ill-conditioned fit (condition {condition:.3e}): {detail}")]
    Fit { condition: f64, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
