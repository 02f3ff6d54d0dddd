use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("modulus {modulus} exceeds the brute-force ceiling {ceiling}; use kl_factor instead")]
    TooLarge { modulus: u64, ceiling: u64 },
    #[error("evaluation at the pole u = 0")]
    Pole,
    #[error("quadrature failed to reach tolerance (estimate {estimate:e}, error {error:e})")]
    NoConvergence { estimate: f64, error: f64 },
    #[error("contour tail {tail:e} exceeds tolerance {tol:e}")]
    ContourTail { tail: f64, tol: f64 },
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::TooLarge { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
