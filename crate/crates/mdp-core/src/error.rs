//! Error type shared by all tabular-MDP primitives.

use thiserror::Error;

/// Errors raised by construction, planning, simulation, estimation, and text I/O.
#[derive(Debug, Error)]
pub enum MdpError {
    /// A transition row's entries sum to something outside `1 ± 1e-9` (and are not all zero).
    #[error("transition row for (state {state}, action {action}) sums to {sum}, expected 1 within 1e-9 or an all-zero row")]
    BadRowSum { state: usize, action: usize, sum: f64 },

    /// A probability entry is negative or non-finite.
    #[error("transition row for (state {state}, action {action}) contains a negative or non-finite entry")]
    BadRowEntry { state: usize, action: usize },

    /// A reward lies outside `[0, 1]` or is non-finite.
    #[error("reward for (state {state}, action {action}) is {value}, expected a finite value in [0, 1]")]
    BadReward { state: usize, action: usize, value: f64 },

    /// A buffer has the wrong length for the declared dimensions.
    #[error("{what}: expected length {expected}, got {got}")]
    ShapeMismatch { what: &'static str, expected: usize, got: usize },

    /// A state/action/horizon index is out of range.
    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange { what: &'static str, index: usize, bound: usize },

    /// An operation needed a known probability row but got the all-zero "unknown" encoding.
    #[error("row for (state {state}, action {action}) is all-zero (unknown); the operation requires a known row")]
    UnknownRow { state: usize, action: usize },

    /// Two objects that must share dimensions (policy/MDP, model/MDP, ...) do not.
    #[error("dimension mismatch between {left} and {right}: {detail}")]
    DimensionMismatch { left: &'static str, right: &'static str, detail: String },

    /// Exhaustive policy enumeration would exceed the caller's cap.
    #[error("exhaustive enumeration needs {needed} policy evaluations, above the cap {cap}")]
    EnumerationTooLarge { needed: u128, cap: u128 },

    /// Text-format parse failure.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Underlying file-system failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
