//! Command-line error category with the process exit code it maps to:
//! 1 for usage problems, 2 for data problems, 3 for numerical failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<grpdesc::Error> for CliError {
    fn from(err: grpdesc::Error) -> Self {
        match err {
            grpdesc::Error::Config(m) => CliError::Usage(format!("invalid configuration: {m}")),
            grpdesc::Error::Dimension(m) => CliError::Data(format!("dimension mismatch: {m}")),
            grpdesc::Error::Data(m) => CliError::Data(format!("invalid data: {m}")),
            grpdesc::Error::Numerical(m) => CliError::Numerical(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
