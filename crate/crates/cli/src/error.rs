use sphere_mt::Error;

use crate::field_file::FormatError;

/// Process exit codes. Each outcome class maps to exactly one code.
pub mod code {
    pub const SUCCESS: u8 = 0;
    pub const INVARIANT: u8 = 1;
    pub const PRECONDITION: u8 = 2;
    pub const FORMAT: u8 = 3;
    pub const BLOWUP: u8 = 10;
    pub const ITERATION_CAP: u8 = 11;
    pub const USAGE: u8 = 64;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invariant failed: {0}")]
    Invariant(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Sizing { .. }
                | Error::AntiAliasing { .. }
                | Error::Resolution { .. }
                | Error::GridMismatch
                | Error::Length { .. }
                | Error::InvalidParameter(_) => code::PRECONDITION,
                Error::Range { .. } => code::BLOWUP,
                Error::Balance { .. } => code::INVARIANT,
                Error::NonFinite { .. } => code::FORMAT,
            },
            CliError::Format(_) | CliError::Config(_) | CliError::Output { .. } => code::FORMAT,
            CliError::Invariant(_) => code::INVARIANT,
            CliError::Usage(_) => code::USAGE,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
