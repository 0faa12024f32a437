use thiserror::Error;

/// Unified error type for the crate.
///
/// The CLI maps variants onto exit codes: validation problems
/// ([`Error::InvalidInput`], [`Error::InsufficientData`], [`Error::Config`])
/// exit 2, runtime and resource problems ([`Error::Io`],
/// [`Error::ResourceLimit`]) exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
