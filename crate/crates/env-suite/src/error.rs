//! Error type for environment construction and validation.

use thiserror::Error;

/// Errors raised by generators, validators, and the family-spec parser.
#[derive(Debug, Error)]
pub enum EnvError {
    #[error("hierarchy structure invalid: {0}")]
    BadHierarchy(String),

    #[error("task family invalid: {0}")]
    BadFamily(String),

    #[error("specs disagree on shared geometry: {0}")]
    GeometryMismatch(String),

    #[error("exit ({state}, {action}) never varies across tasks")]
    ExitNeverVaries { state: usize, action: usize },

    #[error("invalid generator parameter: {0}")]
    BadParameter(String),

    #[error("enumeration size {size} exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Mdp(#[from] mdp_core::MdpError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
