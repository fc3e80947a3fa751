use std::path::PathBuf;

use wavemark_core::CoreError;

/// Errors from the IO and orchestration layer. Everything except
/// `Internal` is a data problem: bad files, bad parameters, inconsistent
/// inputs. `Internal` marks broken invariants inside the harness itself.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Invalid(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        HarnessError::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for data errors, 3 for internal ones. Usage
    /// errors (exit 1) never reach this type; clap reports them.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Internal(_) => 3,
            _ => 2,
        }
    }

    /// Short machine-readable class for `--error-json` output.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Io { .. } => "io",
            HarnessError::Format { .. } => "format",
            HarnessError::Core(_) => "core",
            HarnessError::Invalid(_) => "invalid",
            HarnessError::Internal(_) => "internal",
        }
    }
}
