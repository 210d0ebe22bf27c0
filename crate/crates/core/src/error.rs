use thiserror::Error;

use crate::fock::ModeId;

/// Errors raised by state construction, measurement and formula evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("square root is not representable in the exact coefficient ring")]
    IrrationalSqrt,

    #[error("normalized-convention ladder factors are irrational in exact arithmetic")]
    NormalizedLadderInExactMode,

    #[error("kets use different basis conventions")]
    ConventionMismatch,

    #[error("output mode `{0}` collides with an occupied mode")]
    ModeCollision(ModeId),

    #[error("POVM mode `{0}` is not among the traced modes")]
    PovmOutsideTrace(ModeId),

    #[error("POVM mode sets overlap at `{0}`")]
    PovmOverlap(ModeId),

    #[error("density operator has zero trace")]
    ZeroTrace,

    #[error("photon count {found} exceeds the hard cap {cap}")]
    PhotonCapExceeded { cap: u32, found: u32 },

    #[error("{0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn invalid(key: &str, reason: impl AsRef<str>) -> Self {
        Error::InvalidParameter(format!("`{key}`: {}", reason.as_ref()))
    }
}
