use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("interval matrix has {nonsingleton} non-singleton entries, 2^{nonsingleton} corners exceed the cap of {cap}")]
    CornerBudgetExceeded { nonsingleton: usize, cap: usize },

    #[error("shape matrix is singular or too ill-conditioned (reciprocal condition {rcond:e})")]
    SingularShape { rcond: f64 },

    #[error("operation not supported for the {0} norm")]
    UnsupportedKind(&'static str),

    #[error("dimension {n} is too large for this operation (limit {limit})")]
    DimensionTooLarge { n: usize, limit: usize },

    #[error("anchor point lies outside the interval box")]
    AnchorOutsideBox,

    #[error("interval extension is ill-defined: {0}")]
    IllDefined(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
