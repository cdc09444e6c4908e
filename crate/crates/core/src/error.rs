use thiserror::Error;

/// Errors produced by grid construction, table construction and time stepping.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),

    #[error("final time must be positive, got {0}")]
    InvalidFinalTime(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value detected at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
