use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpaError>;

#[derive(Debug, Error)]
pub enum SpaError {
    /// Model parameters outside the admissible domain.
    #[error("parameter domain: {0}")]
    Domain(String),

    /// A call that violates an operation's precondition.
    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("missing trajectory for vertex {0}; regenerate with trajectory tracking enabled")]
    MissingTrajectory(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("resource exhaustion: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SpaError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        SpaError::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        SpaError::Domain(msg.into())
    }
}
