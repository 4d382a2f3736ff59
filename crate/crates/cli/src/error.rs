use thiserror::Error;
use voi_cases::CaseError;
use voi_core::VoiError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown {kind} `{name}`; registered: {}", .available.join(", "))]
    UnknownName {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Engine(#[from] VoiError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    /// Process exit status: 2 for bad requests, 1 for analysis failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::UnknownName { .. } | CliError::Usage(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}
