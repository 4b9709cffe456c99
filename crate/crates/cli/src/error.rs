use std::fmt;

use shelab_core::Error as CoreError;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    /// Stability or divisibility preconditions of the numerics.
    Numeric(String),
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Numeric(_) => 3,
            AppError::Io(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "usage error: {m}"),
            AppError::Numeric(m) => write!(f, "numeric precondition failed: {m}"),
            AppError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Divisibility { .. }
            | CoreError::Unstable { .. }
            | CoreError::NotSymmetric { .. }
            | CoreError::NotPositiveDefinite { .. } => AppError::Numeric(e.to_string()),
            _ => AppError::Usage(e.to_string()),
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;

pub fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}
