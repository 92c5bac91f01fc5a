//! The episodic-environment interface the learners run against, plus the
//! adapter that exposes a [`TabularMDP`] through it.
//!
//! Dynamics are assumed stationary within an episode (environments whose
//! transitions depend on progress must encode that progress in the state),
//! so learners pool visit counts across timesteps.

use mdp_core::{sample_from_row, MdpError, QueryCounter, TabularMDP};
use rand_chacha::ChaCha8Rng;

use crate::error::LearnerError;

/// An episodic environment with `num_states × num_actions` tables and a fixed
/// episode length. Implementations count their own query cost.
pub trait EpisodicEnv {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn horizon(&self) -> usize;

    /// Starts a new episode and returns the initial state.
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Result<usize, LearnerError>;

    /// Takes one step from `s` with action `a`; returns the next state and
    /// the reward collected.
    fn step(&mut self, s: usize, a: usize, rng: &mut ChaCha8Rng) -> Result<(usize, f64), LearnerError>;

    /// Expected-reward table `[s * A + a]` when rewards are known in advance;
    /// `None` makes the learner estimate rewards from samples.
    fn known_rewards(&self) -> Option<Vec<f64>> {
        None
    }

    /// Whether `a` may be taken at `s`. Disallowed actions are never planned
    /// or played; every state must allow at least one action.
    fn action_allowed(&self, s: usize, a: usize) -> bool {
        let _ = (s, a);
        true
    }
}

/// Runs episodes of a tabular MDP, optionally with an overridden reward
/// table, counting every simulated step.
pub struct TabularSession<'a> {
    mdp: &'a TabularMDP,
    rewards: Vec<f64>,
    counter: QueryCounter,
}

impl<'a> TabularSession<'a> {
    /// # Errors
    /// Rejects time-varying MDPs (learners pool counts across timesteps) and
    /// reward tables of the wrong shape.
    pub fn new(mdp: &'a TabularMDP, reward_override: Option<&[f64]>) -> Result<Self, LearnerError> {
        if mdp.is_per_step() {
            return Err(LearnerError::BadEnv("learners require stationary dynamics".to_string()));
        }
        let rewards = match reward_override {
            Some(r) => {
                let want = mdp.num_states() * mdp.num_actions();
                if r.len() != want {
                    return Err(MdpError::ShapeMismatch { what: "reward override", expected: want, got: r.len() }
                        .into());
                }
                r.to_vec()
            }
            None => mdp.rewards().to_vec(),
        };
        Ok(Self { mdp, rewards, counter: QueryCounter::new() })
    }

    pub fn counter(&self) -> &QueryCounter {
        &self.counter
    }

    pub fn into_counter(self) -> QueryCounter {
        self.counter
    }
}

impl EpisodicEnv for TabularSession<'_> {
    fn num_states(&self) -> usize {
        self.mdp.num_states()
    }

    fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }

    fn horizon(&self) -> usize {
        self.mdp.horizon()
    }

    fn reset(&mut self, _rng: &mut ChaCha8Rng) -> Result<usize, LearnerError> {
        Ok(self.mdp.start_state())
    }

    fn step(&mut self, s: usize, a: usize, rng: &mut ChaCha8Rng) -> Result<(usize, f64), LearnerError> {
        let next = sample_from_row(self.mdp.stationary_row(s, a), rng)?;
        self.counter.record_steps(1);
        Ok((next, self.rewards[s * self.mdp.num_actions() + a]))
    }

    fn known_rewards(&self) -> Option<Vec<f64>> {
        Some(self.rewards.clone())
    }
}
