use std::path::PathBuf;

use serde_json::json;

/// Everything the command line can fail with.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Identification(#[from] lindep_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "config_parse",
            CliError::Schema(_) => "schema",
            CliError::Ingest(e) => e.kind(),
            CliError::Identification(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Schema(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Ingest(_) => 4,
            CliError::Identification(_) => 5,
        }
    }

    /// Single-line JSON object describing the failure.
    pub fn to_json_line(&self) -> String {
        let mut obj = json!({
            "error": self.kind(),
            "message": self.to_string(),
        });
        if let CliError::Identification(lindep_core::Error::Block { block, .. }) = self {
            obj["block"] = json!(block);
        }
        if let CliError::Ingest(e) = self {
            if let Some(row) = e.row() {
                obj["row"] = json!(row);
            }
        }
        obj.to_string()
    }
}
