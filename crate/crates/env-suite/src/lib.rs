//! Environment generators for the hierarchical multi-task RL toolkit, plus
//! exact validators for the structure the rest of the workspace relies on.
//!
//! A *task family* is a set of tabular MDPs sharing states, actions, horizon,
//! and rewards-irrelevant layout, in which only a small set of *exit* pairs
//! ever changes dynamics across tasks; exits always land on declared
//! *entrance* states of the clusters they connect. Generators:
//!
//! - [`make_four_room_family`]: a gridworld of four rooms joined by one-way
//!   gates that are open or closed per task, with an optional dummy start
//!   whose first action teleports to a per-task start cell;
//! - [`make_binary_tree_mdp`] / [`make_binary_tree_family`]: a depth-`W`
//!   action-labelled tree whose leaves gamble on reaching a single gate
//!   state, built either with terminal success/failure states or in a
//!   reduced form that stops at the gate;
//! - [`make_counterexample_env`]: two single-task constructions with declared
//!   hierarchies whose committed high-level play is provably worse than flat
//!   play (a high-variance chain and a shortcut room).
//!
//! Validators: [`validate_family`] replays the structural definition exactly
//! (row identity, supports, separation, reachability) and probes exit
//! reconfiguration with sampled mixtures; [`check_coverage`] certifies that
//! removing exits costs value and borrowing them across tasks gains value,
//! subset by subset. [`FamilyConfig`] loads any generator from a flat
//! `key = value` spec.

mod binary_tree;
mod config;
mod counterexample;
mod coverage;
mod error;
mod family;
mod four_room;
mod hierarchy;
mod shortcut;
mod validate;

pub use binary_tree::{
    make_binary_tree_family, make_binary_tree_mdp, BinaryTreeSpec, TreeLayout, TreeVariant,
};
pub use config::{BuiltEnv, FamilyConfig, TreeChoice};
pub use counterexample::{make_counterexample_env, ChainStates, CounterexampleKind, TwoArmStates};
pub use coverage::{check_coverage, CoverageReport};
pub use error::EnvError;
pub use family::{cluster_restriction, ClusterRestriction, TaskFamily};
pub use four_room::{
    benchmark_four_room_specs, make_four_room_family, Door, FourRoomGeometry, FourRoomSpec, Room,
    ACTION_DOWN, ACTION_LEFT, ACTION_RIGHT, ACTION_UP, NUM_ACTIONS,
};
pub use hierarchy::{hierarchy_from_text, LatentHierarchy};
pub use shortcut::{
    make_shortcut_family, SHORTCUT_DOOR, SHORTCUT_GOAL, SHORTCUT_HORIZON, SHORTCUT_START,
};
pub use validate::{validate_family, ValidationParams, ValidationReport};
