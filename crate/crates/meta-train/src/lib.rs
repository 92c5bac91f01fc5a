//! Multi-task exit discovery for tabular task families.
//!
//! Tasks in a family share all transition rows except at a small set of
//! (state, action) pairs — the exits. This crate finds those pairs in three
//! phases: per-task optimistic learning ([`phase1_task_learning`]), reward-
//! free reference learning on designated tasks ([`phase2_reward_free`]), and
//! a detection loop ([`phase3_detect_exits`]) that plans with rows borrowed
//! across tasks ([`boat_vi`]) and flags any pair whose real dynamics betray
//! the borrowed ones. [`run_exit_discovery`] chains the phases around one
//! [`MetaTrainState`]. An exhaustive probe-everything baseline
//! ([`brute_force_hierarchy`]) finds the same set at a much larger step
//! count, and [`enumerate_imaginable_values`] / [`best_over_policies`]
//! provide exact oracles for the planner on small instances.

mod boat;
mod brute;
mod config;
mod enumeration;
mod error;
mod exits;
mod phase1;
mod phase2;
mod phase3;
mod pipeline;
mod state;

pub use boat::{boat_vi, BoatTables, ImaginedIndex};
pub use brute::brute_force_hierarchy;
pub use config::{scaled_budgets, MetaTrainConfig, ProblemDims, ScaleParams};
pub use enumeration::{best_over_policies, enumerate_imaginable_values};
pub use error::MetaTrainError;
pub use exits::ExitTable;
pub use phase1::{phase1_task_learning, Phase1Task};
pub use phase2::{
    coverage_ratio, exact_sampling_distribution, max_visit_probability, merge_reference_models,
    phase2_reward_free, Phase2Output,
};
pub use phase3::{learn_exit, phase3_detect_exits, preliminary_pairwise_pass};
pub use pipeline::{run_exit_discovery, run_phase1, run_phase2, DiscoveryOutcome};
pub use state::{MetaTrainState, PhaseCounters};
