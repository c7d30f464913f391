use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates an operation's preconditions.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical certificate check exceeded its threshold.
    #[error("verification failed: {check} residual {residual:.3e} exceeds {threshold:.1e}")]
    Verification {
        check: String,
        residual: f64,
        threshold: f64,
    },

    /// Two computations that must agree did not.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn verification(check: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Error::Verification {
            check: check.into(),
            residual,
            threshold,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
