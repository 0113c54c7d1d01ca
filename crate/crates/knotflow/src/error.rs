//! Crate-wide error type.

/// Errors reported by curve, quadrature and flow operations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The curve degenerates: the minimum speed is too small relative to the maximum.
    #[error("curve is not regular: min |gamma'| = {min_speed:.3e} < {threshold:.3e} * max |gamma'|")]
    Regularity { min_speed: f64, threshold: f64 },

    /// Two samples at genuinely distinct parameters (arc separation above
    /// `0.05 L`) nearly coincide in space.
    #[error(
        "curve appears self-intersecting: chord {chord:.3e} below {limit:.3e} \
         at arc separation {arc:.3e}"
    )]
    Embeddedness { chord: f64, arc: f64, limit: f64 },

    /// A quadrature's Richardson self-check exceeded its tolerance.
    #[error("{what}: Richardson estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    NonConvergence {
        what: &'static str,
        estimate: f64,
        tolerance: f64,
    },

    /// The adaptive step size fell below `dt_min`.
    #[error("time step collapsed below dt_min = {dt_min:.3e} at t = {t:.6}, step {step}")]
    StepCollapse { t: f64, dt_min: f64, step: usize },

    /// A series fit was requested on too few samples.
    #[error("insufficient tail samples for fit: have {have}, need {need}")]
    InsufficientTail { have: usize, need: usize },

    /// Parameter validation failure.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input samples contain NaN or infinity.
    #[error("non-finite samples")]
    NonFinite,
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
