use std::fmt;

use vrpca_core::Error;

/// Command failures, mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or parameter combinations (exit 1).
    Usage(String),
    /// Unreadable or malformed input, unwritable output (exit 2).
    Io(String),
    /// Rank deficiency or a degenerate iterate (exit 3).
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            Error::Io(_) | Error::Parse { .. } | Error::InvalidData(_) => CliError::Io(e.to_string()),
            Error::Shape { .. } | Error::Domain(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
