use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller-supplied data violates a precondition.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error in {path}: {context}: {message}")]
    Parse {
        path: PathBuf,
        context: String,
        message: String,
    },

    #[error("unsupported container version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    /// Training produced a non-finite value.
    #[error("numeric failure at epoch {epoch}: {message}")]
    Numeric { epoch: usize, message: String },

    /// No training node carries the sampled neighbor class.
    #[error("no auxiliary candidate in the sampled neighbor class")]
    NoAuxiliary,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
