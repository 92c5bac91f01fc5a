//! Error type for the exit-detection pipeline.

use thiserror::Error;

/// Failures raised by configuration checks, the detection phases, and the
/// disk format for pipeline state.
#[derive(Debug, Error)]
pub enum MetaTrainError {
    /// A configuration field violates its declared range.
    #[error("bad config: {0}")]
    BadConfig(String),

    /// Inputs whose shapes disagree (models, tables, reward vectors).
    #[error("bad input: {0}")]
    BadInput(String),

    /// An exit-learning run collected too few samples of its pair.
    #[error("exit ({state}, {action}) unreachable at budget: {samples} samples, threshold {threshold}")]
    ExitUnreachable { state: usize, action: usize, samples: u64, threshold: u64 },

    /// The detection loop kept flagging pairs past the partition bound.
    #[error("detection failed to settle: {visits} task visits with {exits} exits flagged (bound {bound})")]
    RunawayDetection { visits: usize, exits: usize, bound: usize },

    /// Enumeration was asked for more index assignments than the cap allows.
    #[error("enumeration too large: {combinations} combinations exceed cap {cap}")]
    EnumerationTooLarge { combinations: u128, cap: u128 },

    /// A malformed line in the persisted-state text format.
    #[error("state text line {line}: {message}")]
    Text { line: usize, message: String },

    #[error(transparent)]
    Learner(#[from] base_learners::LearnerError),

    #[error(transparent)]
    Mdp(#[from] mdp_core::MdpError),
}
