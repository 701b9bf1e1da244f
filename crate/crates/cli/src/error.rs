use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] isoexplain::Error),

    #[error("{}: output exists; pass --force to overwrite", path.display())]
    OutputExists { path: PathBuf },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("invalid run config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::OutputExists { .. } => "output_exists",
            CliError::Io { .. } => "io",
            CliError::Config(_) => "invalid_config",
            CliError::Usage(_) => "usage",
        }
    }

    /// Single-line JSON object `{"error": ..., "kind": ...}`.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.to_string(), "kind": self.kind() }).to_string()
    }
}
