//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by configuration validation, design construction,
/// fitting, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A penalty or solver setting violates a documented bound.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Input shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Input data fails a validity check.
    #[error("invalid data: {0}")]
    Data(String),
    /// The computation broke down numerically.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
