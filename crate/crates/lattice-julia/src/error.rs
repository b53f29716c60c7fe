use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate family member (lambda = 0)")]
    Degenerate,
    #[error("pole of the map at {0}")]
    Pole(String),
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("point is not attracted to 1 within the budget")]
    NotAttracted,
    #[error("Newton iteration did not converge, residual {residual:e}")]
    NonConvergence { residual: f64 },
    #[error("continuation failed for index {index} at alpha step {step}")]
    Continuation { index: u64, step: usize },
    #[error("periodic points {a} and {b} collided")]
    Collision { a: u64, b: u64 },
    #[error("periodic point residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
    #[error("pressure does not bracket 1 on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("work budget exceeded: {0}")]
    Budget(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
