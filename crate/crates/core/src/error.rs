use thiserror::Error;

/// Errors raised by bound evaluation, simulation and campaign handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: space has dimension {expected}, point has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("quadrature did not converge: achieved relative error {achieved:e}, target {target:e}")]
    Quadrature { achieved: f64, target: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("campaign: {0}")]
    Campaign(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    require(v.is_finite() && v > 0.0, || format!("{name} must be finite and > 0, got {v}"))
}

pub(crate) fn nonneg(name: &str, v: f64) -> Result<()> {
    require(v.is_finite() && v >= 0.0, || format!("{name} must be finite and >= 0, got {v}"))
}

pub(crate) fn unit_open(name: &str, v: f64) -> Result<()> {
    require(v > 0.0 && v < 1.0, || format!("{name} must lie in (0, 1), got {v}"))
}
