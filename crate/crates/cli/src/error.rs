use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Errors surfaced to the user, each with a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input data, flags or configuration (exit 2).
    #[error("{0}")]
    Input(String),
    /// Reading or writing a file failed (exit 3).
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn in_file(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Io { .. } => ExitCode::from(3),
        }
    }
}

impl From<occusim::Error> for CliError {
    fn from(e: occusim::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}
