use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: &'static str, found: &'static str },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("walk kind mismatch: operator is {operator}, requested {requested}")]
    WalkMismatch { operator: &'static str, requested: &'static str },

    #[error("non-integral step count: {0}")]
    NonIntegralSteps(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
