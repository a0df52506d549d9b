//! Error types shared across the crate.
//!
//! The three variants mirror the process exit codes of the batch driver:
//! configuration errors exit 1, hypothesis/validation failures exit 2 and
//! numeric non-convergence exits 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: unknown catalog name, parameter out of range,
    /// truncation order beyond the known expansion, bad config file.
    #[error("config error: {0}")]
    Config(String),

    /// A hypothesis or invariant check failed on otherwise well-formed
    /// input (e.g. shift constant not negative, non-positive ellipticity
    /// bound).
    #[error("validation failure: {0}")]
    Validation(String),

    /// A numeric procedure did not converge within its budget.
    #[error("numeric non-convergence: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Validation(_) => 2,
            Error::Numeric(_) => 3,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
