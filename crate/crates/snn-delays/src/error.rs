use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum SnnError {
    #[error("dimension mismatch in {op}: {detail}")]
    Dim { op: &'static str, detail: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SnnError>;

impl SnnError {
    pub fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        SnnError::Dim {
            op,
            detail: detail.into(),
        }
    }
}
