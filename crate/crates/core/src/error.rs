use thiserror::Error;

/// Errors raised by the exact and numeric kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: u32, right: u32 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("{ell} is not coprime to the level {level}")]
    NotCoprime { ell: i64, level: u32 },

    #[error("empty precision window")]
    EmptyWindow,

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("matrix does not have determinant 1: {0}")]
    NotSl2(String),

    #[error("nonzero coefficient off the q^{level}-grid at exponent {exponent}")]
    OffGrid { level: u32, exponent: i64 },

    #[error("nonzero remainder at exponent {exponent} after reduction to j")]
    NonzeroRemainder { exponent: i64 },

    #[error("not integral: {0}")]
    NotIntegral(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("factorization shape violated: {0}")]
    ShapeViolated(String),

    #[error("tail bound unreachable: {0}")]
    TailBound(String),

    #[error("malformed data: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
