//! Error type for the optimistic learners.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("invalid budget: {0}")]
    BadBudget(String),

    #[error("policy set is empty")]
    EmptyPolicySet,

    #[error("environment misuse: {0}")]
    BadEnv(String),

    #[error("malformed policy-set text at line {line}: {message}")]
    Text { line: usize, message: String },

    #[error(transparent)]
    Mdp(#[from] mdp_core::MdpError),
}
