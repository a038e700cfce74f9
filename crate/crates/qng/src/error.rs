use std::io;
use std::path::PathBuf;

/// Process exit status of the `qng` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    NotCertified = 1,
    Usage = 2,
    Validation = 3,
    NoDepth = 4,
    Unphysical = 5,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qng_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("unphysical input: {0}")]
    Unphysical(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        use qng_core::Error as E;
        match self {
            Self::Core(E::Validation { .. } | E::Truncation { .. } | E::Envelope(_)) => {
                ExitCode::Validation
            }
            Self::Core(E::NoDepth { .. }) => ExitCode::NoDepth,
            Self::Unphysical(_) => ExitCode::Unphysical,
            _ => ExitCode::Usage,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
