use thiserror::Error;

/// Errors raised by the numerical routines and the config parsers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{what} did not converge (achieved error {achieved:.3e})")]
    NonConvergence { what: String, achieved: f64 },

    #[error("{method} inversion failed at t={t}: {reason}")]
    Inversion {
        method: &'static str,
        t: f64,
        reason: String,
    },

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("not representable: {0}")]
    NotRepresentable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (divergence, non-convergence) as
    /// opposed to malformed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Inversion { .. }
                | Error::Divergence(_)
                | Error::NotRepresentable(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
