use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("q must lie in the open interval (0, 1), got {0}")]
    InvalidQ(f64),

    #[error("malformed word {0:?}: expected letters a/b or the token e")]
    InvalidWord(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("word of length {len} has no tail of length {n}")]
    TailTooShort { len: usize, n: usize },

    #[error("estimate hypothesis violated: common tail {common} shorter than N = {n}")]
    HypothesisViolated { common: usize, n: usize },

    #[error("support size {size} exceeds the configured cap {cap} at step {step}")]
    SupportOverflow { size: usize, cap: usize, step: usize },

    #[error("duplicate label {0} in truncation")]
    DuplicateLabel(String),

    #[error("fusion matrix is zero on the truncation")]
    ZeroMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("map {index} is not contractive: norm {norm}")]
    NotContractive { index: usize, norm: f64 },

    #[error("map {index} is not unital completely positive: {reason}")]
    NotUcp { index: usize, reason: String },

    #[error("operand is not fixed by the idempotent (residual {0:e})")]
    NotInImage(f64),

    #[error("idempotent residual {0:e} above tolerance")]
    NotIdempotent(f64),

    #[error("empty family")]
    EmptyFamily,

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
