use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Domain errors mean the inputs sit outside the region where an operation is
/// defined (or certified); precision errors mean the requested accuracy could
/// not be reached within the configured budget.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision unreachable: {message} (achieved error estimate {achieved:.3e})")]
    Precision { message: String, achieved: f64 },

    #[error("division unstable: {0}")]
    DivisionUnstable(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precision(msg: impl Into<String>, achieved: f64) -> Self {
        Error::Precision {
            message: msg.into(),
            achieved,
        }
    }

    /// Short machine-readable tag, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precision { .. } => "precision",
            Error::DivisionUnstable(_) => "division-unstable",
            Error::Invalid(_) => "invalid-input",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
