use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (model files, configs, arguments).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A matrix that must be positive definite failed to factorize.
    #[error("{what} is not numerically positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { what: String, min_eigenvalue: f64 },

    /// A quantity that is nonnegative in exact arithmetic came out clearly negative.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// Exhaustive enumeration would exceed its budget.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Io { .. } | Error::Parse { .. } | Error::Budget(_)
        )
    }
}
