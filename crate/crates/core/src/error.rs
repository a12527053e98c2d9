use thiserror::Error;

/// Errors produced by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The convolution set does not generate the whole group, so the
    /// interaction graph is not strongly connected.
    #[error("convolution set does not span the group")]
    NotSpanning,

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// Every nonzero Fourier mode is annihilated by some set of the mixture.
    #[error("degenerate mixture: geometric-mean subdominant modulus is zero")]
    DegenerateMixture,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
