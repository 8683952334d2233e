use thiserror::Error;

/// Failure classes of a run, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Library(#[from] lpcalc::Error),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Library(e) => match e {
                lpcalc::Error::Io(_) | lpcalc::Error::Format { .. } | lpcalc::Error::UnsupportedVersion(_) => EXIT_IO,
                lpcalc::Error::Divergence { .. } => EXIT_CHECK_FAILED,
                _ => EXIT_USAGE,
            },
        }
    }
}
