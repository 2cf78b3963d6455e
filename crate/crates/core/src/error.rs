use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("factorization breakdown: {0}")]
    Factorization(String),
    #[error("channel truncation not certified up to |m| = {0}")]
    Truncation(i64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integration(_) | Error::Factorization(_) | Error::Truncation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
