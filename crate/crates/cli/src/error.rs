use std::io;
use std::path::{Path, PathBuf};

use nvod_core::transport::TransportError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("playback starved: {0}")]
    Starvation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::File { .. } | CliError::Io(_) => 2,
            CliError::Starvation(_) => 3,
        }
    }

    pub fn file(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::File {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<nvod_core::Error> for CliError {
    fn from(e: nvod_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::Io(e) => CliError::Io(e),
            TransportError::Timeout(msg) => {
                CliError::Io(io::Error::new(io::ErrorKind::TimedOut, msg))
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
