use thiserror::Error;

pub type Result<T> = std::result::Result<T, QetError>;

#[derive(Debug, Error)]
pub enum QetError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine failed to converge or produced an unusable result.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The quantity is mathematically undefined at this point (e.g. an
    /// infinite effective inverse temperature at zero field).
    #[error("undefined: {0}")]
    Singular(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(QetError::Domain(msg.into()))
}
