use thiserror::Error;

/// Crate-wide error taxonomy.
///
/// `Domain` marks mathematically invalid inputs (inverting zero, singular
/// matrices), `Usage` marks contract violations by the caller, `Resource`
/// marks exceeded enumeration caps, `Structure` marks a failed structural
/// assertion naming the violated clause (these falsify a theorem and are
/// treated as alarms, never recovered from), `Internal` marks bugs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("structural check failed [{clause}]: {detail}")]
    Structure { clause: String, detail: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn structure(clause: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Structure {
            clause: clause.into(),
            detail: detail.into(),
        }
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
