//! Finite-horizon tabular MDPs: representation, exact planning and
//! evaluation, seeded simulation, empirical estimation, and a plain-text
//! serialization format.
//!
//! This crate is the numerical substrate for the hierarchical multi-task RL
//! toolkit: environments, learners, exit detection, and the high-level
//! planner all build on these types.
//!
//! Conventions shared across the workspace:
//! - probabilities and rewards are `f64`; transition rows sum to exactly 1.0
//!   after construction, or are all-zero ("unknown"/dead-end rows);
//! - argmax ties always break toward the lowest action index;
//! - randomness flows through explicit [`rand_chacha::ChaCha8Rng`] streams
//!   derived from a root seed via [`child_rng`], so every episode is
//!   replayable in isolation;
//! - query cost is counted in environment timesteps via [`QueryCounter`].

mod empirical;
mod error;
pub mod exhaustive;
pub mod gen;
mod mdp;
mod policy;
mod simulate;
pub mod textio;
mod value;

pub use empirical::{estimate_dynamics, tv_distance, DynamicsTable, EmpiricalModel};
pub use error::MdpError;
pub use mdp::{TabularMDP, ROW_SUM_TOLERANCE};
pub use policy::{DetPolicy, Policy, Step, Trajectory};
pub use simulate::{child_rng, sample_from_row, simulate_episode, QueryCounter};
pub use value::{
    importance_value, occupancy, pair_visit_probability, pairs_visit_probability, policy_value,
    policy_value_with_rewards, significance, value_iteration, OccupancyMeasure, ValueTable,
};
