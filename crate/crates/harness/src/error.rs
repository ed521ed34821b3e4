use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] gzk_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("config parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config serialise: {0}")]
    Serialise(#[from] toml::ser::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("output directory {0} is not empty; pass --force to reuse it")]
    OutputExists(PathBuf),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
