use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("multiplier is not Hermitian at frequency {0:?}; real output impossible")]
    NonHermitian(Vec<i64>),

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
