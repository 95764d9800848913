use thiserror::Error;

/// Errors raised by the simulation, oracle and protocol layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("integration diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("integration diverged for initial condition {id} at t = {time}")]
    DivergedInitial { id: usize, time: f64 },

    #[error("dimension {dim} exceeds dense storage cap {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("norm drift {drift:e} exceeds tolerance; reduce the step (dt = {dt})")]
    StepSize { drift: f64, dt: f64 },

    #[error("no transition detected: |xbar| never reaches threshold {threshold}")]
    NoTransition { threshold: f64 },

    #[error("numeric solve failed: {0}")]
    NumericSolve(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
