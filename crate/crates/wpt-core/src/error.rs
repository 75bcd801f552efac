use thiserror::Error;

/// Errors produced by the circuit, estimation and transient layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument violates its domain; `name` is the offending field.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// A primary-side measurement cannot arise from the configured circuit
    /// (e.g. |Z_IN| below the decoupled magnitude, or a negative radicand).
    #[error("inconsistent measurement: {0}")]
    InconsistentMeasurement(String),

    /// The phase-angle inversion is evaluated where its denominator vanishes
    /// (near resonance the input-impedance phase carries no coupling information).
    #[error("ill-conditioned phase inversion: {0}")]
    IllConditionedPhase(String),

    /// The inductance matrix L1*L2 - M^2 is numerically singular (k -> 1).
    #[error("coupling too close to unity: L1*L2 - M^2 = {det} is not positive definite")]
    NearUnityCoupling { det: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}

/// Finite and strictly positive, or an [`Error::InvalidParam`] naming the field.
pub(crate) fn ensure_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be strictly positive, got {v}"),
        ))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
