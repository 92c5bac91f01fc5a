//! Optimistic episodic RL learners used as subroutines across the workspace:
//! a Hoeffding-bonus learner for solving tasks and a Bernstein-bonus learner
//! for reward-free exploration and goal reaching.
//!
//! Both learners follow the same loop — plan greedily against an empirical
//! model plus an exploration bonus, play the greedy policy for one episode,
//! fold the transitions back in — and differ only in the bonus shape. Counts
//! are pooled across timesteps because task dynamics are stationary. The
//! learners run against anything implementing [`EpisodicEnv`]; tabular tasks
//! use [`TabularSession`], and the high-level planner feeds in its own
//! surrogate environment.
//!
//! Every run returns a [`PolicySet`]: the per-episode policies (which later
//! phases sample from as a uniform mixture), realized returns, and the root
//! optimistic values that drove exploration.

mod env;
mod error;
mod optimistic;
mod policy_set;

pub use env::{EpisodicEnv, TabularSession};
pub use error::LearnerError;
pub use optimistic::{optimal_value, run_euler, run_optimistic_learner, run_ucbvi, BonusRule};
pub use policy_set::{sample_policy_returns, LearnerBudget, PolicySet, SampleMode, TransitionDataset};
