use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
    #[error("point is classically forbidden (margin {margin:.3e}); use the tunnel continuation")]
    Forbidden { margin: f64 },
    #[error("point lies on the caustic (margin {margin:.3e}); use the uniform approximation")]
    OnCaustic { margin: f64 },
    #[error("energy sits on a pole of the Green function (k = {k})")]
    Pole { k: f64 },
    #[error("coincident or degenerate endpoints: {0}")]
    Degenerate(String),
    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),
    #[error("partial-wave sum not converged at l_max = {l_max} (tail estimate {tail:.3e})")]
    Unconverged { l_max: usize, tail: f64 },
    #[error("finite-difference evaluation failed: {0}")]
    FiniteDifference(String),
}

pub type Result<T> = std::result::Result<T, Error>;
