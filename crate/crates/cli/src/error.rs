use thiserror::Error;

use crate::codec::CodecError;

/// Exit status for input and validation failures.
pub const EXIT_INVALID: u8 = 2;
/// Exit status when the requested quantity is undefined for valid input.
pub const EXIT_UNDEFINED: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: String, source: CodecError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] flicker_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use flicker_core::Error::UndefinedRealization;
        match self {
            CliError::Core(UndefinedRealization(_))
            | CliError::Input { source: CodecError::Core(UndefinedRealization(_)), .. } => EXIT_UNDEFINED,
            CliError::Write { .. } => 1,
            _ => EXIT_INVALID,
        }
    }
}
