use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polynomial is not symmetric under u <-> v")]
    Asymmetric,

    #[error("polynomial is outside R_{d}: {reason}")]
    NotInSpace { d: u32, reason: String },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("family must be normalized for this operation")]
    NeedsNormalized,

    #[error("quadrature rule of degree {have} cannot integrate degree {need} exactly")]
    InsufficientRule { have: u32, need: u32 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("unknown solver backend `{0}`")]
    UnknownBackend(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
