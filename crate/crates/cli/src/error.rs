use std::path::Path;

use thiserror::Error;

/// Everything a command can fail with. The exit code is fixed per variant:
/// 2 for usage and parse problems, 3 for scenarios that parse but are not
/// valid.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{origin}{}: {message}", position.map(|(l, c)| format!(":{l}:{c}")).unwrap_or_default())]
    Parse {
        origin: String,
        position: Option<(usize, usize)>,
        message: String,
    },
    #[error("invalid scenario: {key}: {message}")]
    InvalidScenario { key: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Parse { .. } | Self::Io { .. } => 2,
            Self::InvalidScenario { .. } => 3,
        }
    }
}
