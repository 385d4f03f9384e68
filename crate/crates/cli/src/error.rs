use std::fmt;

/// A failure classified by who has to fix it; the class picks the exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or environment. Exit 2.
    Config(anyhow::Error),
    /// Unreadable or invalid input data. Exit 3.
    Data(anyhow::Error),
    /// Anything else (I/O while writing outputs, ...). Exit 1.
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            CliError::Config(e) => ("configuration error", e),
            CliError::Data(e) => ("data error", e),
            CliError::Internal(e) => ("error", e),
        };
        write!(f, "{kind}: {e:#}")
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Internal(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Config(e.into())
}

pub fn data_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Data(e.into())
}

macro_rules! config_bail {
    ($($arg:tt)*) => {
        return Err($crate::error::CliError::Config(anyhow::anyhow!($($arg)*)))
    };
}

macro_rules! data_bail {
    ($($arg:tt)*) => {
        return Err($crate::error::CliError::Data(anyhow::anyhow!($($arg)*)))
    };
}

pub(crate) use config_bail;
pub(crate) use data_bail;
