use thiserror::Error;

use crate::bounding::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Input(String),

    /// The LP behind a bound did not reach an optimum. For moment inputs this
    /// usually means the supplied moments are inconsistent.
    #[error("{method}: LP is {status}")]
    Lp { method: String, status: LpStatus },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Input-side problems map to exit code 1, numerical ones to 2.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::DimensionMismatch { .. } | Error::Input(_))
    }
}
