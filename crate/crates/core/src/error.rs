use thiserror::Error;

/// Failure modes shared by every solver component.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("non-finite value at mode ({mx}, {my}): {msg}")]
    NonFinite { mx: i64, my: i64, msg: String },

    #[error("range error: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("blow-up at t = {t}: {msg}")]
    BlowUp { t: f64, msg: String },

    #[error("memory guard: {0}")]
    Memory(String),

    #[error("spec mismatch: {0}")]
    SpecMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
