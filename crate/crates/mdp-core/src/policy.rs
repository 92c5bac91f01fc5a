//! Policies and trajectories.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::MdpError;
use crate::mdp::TabularMDP;

/// Deterministic nonstationary policy `π_h(s) → a`, with an optional set of
/// states where the policy instead plays a uniformly random action.
///
/// The uniform override exists for learners that deliberately randomize at a
/// designated state (e.g. reward-free exploration policies that act uniformly
/// at their goal); everywhere else the table applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetPolicy {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    /// Action table, laid out as `[h * S + s]`.
    actions: Vec<usize>,
    /// States where the action is uniform over `A` (overrides the table).
    uniform_states: Vec<bool>,
}

impl DetPolicy {
    /// Builds a policy from an action table laid out as `[h * S + s]`.
    pub fn new(horizon: usize, num_states: usize, num_actions: usize, actions: Vec<usize>) -> Result<Self, MdpError> {
        if actions.len() != horizon * num_states {
            return Err(MdpError::ShapeMismatch { what: "policy table", expected: horizon * num_states, got: actions.len() });
        }
        if let Some(&bad) = actions.iter().find(|&&a| a >= num_actions) {
            return Err(MdpError::IndexOutOfRange { what: "action", index: bad, bound: num_actions });
        }
        Ok(Self { horizon, num_states, num_actions, actions, uniform_states: vec![false; num_states] })
    }

    /// Policy that plays a fixed action everywhere.
    pub fn constant(horizon: usize, num_states: usize, num_actions: usize, action: usize) -> Result<Self, MdpError> {
        Self::new(horizon, num_states, num_actions, vec![action; horizon * num_states])
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Tabled action at `(h, s)` (ignoring any uniform override).
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.actions[h * self.num_states + s]
    }

    pub fn set_action(&mut self, h: usize, s: usize, a: usize) {
        assert!(a < self.num_actions, "action {a} out of range {}", self.num_actions);
        self.actions[h * self.num_states + s] = a;
    }

    /// Forces the policy to play `a` at state `s` for every timestep,
    /// clearing any uniform override there.
    pub fn override_state_action(&mut self, s: usize, a: usize) {
        assert!(a < self.num_actions, "action {a} out of range {}", self.num_actions);
        for h in 0..self.horizon {
            self.actions[h * self.num_states + s] = a;
        }
        self.uniform_states[s] = false;
    }

    /// Marks `s` as a state where the policy acts uniformly at random.
    pub fn set_uniform_at(&mut self, s: usize) {
        self.uniform_states[s] = true;
    }

    pub fn is_uniform_at(&self, s: usize) -> bool {
        self.uniform_states[s]
    }

    /// Action played at `(h, s)`, sampling if the state is a uniform override.
    pub fn act(&self, h: usize, s: usize, rng: &mut ChaCha8Rng) -> usize {
        if self.uniform_states[s] {
            rng.gen_range(0..self.num_actions)
        } else {
            self.action(h, s)
        }
    }

    /// Probability the policy plays `a` at `(h, s)`.
    pub fn action_prob(&self, h: usize, s: usize, a: usize) -> f64 {
        if self.uniform_states[s] {
            1.0 / self.num_actions as f64
        } else if self.action(h, s) == a {
            1.0
        } else {
            0.0
        }
    }

    /// Copy extended to `num_states` states (new states get action 0); used
    /// when evaluating a policy on an MDP with appended sink states.
    pub fn extended_to(&self, num_states: usize) -> Self {
        assert!(num_states >= self.num_states);
        let mut actions = Vec::with_capacity(self.horizon * num_states);
        for h in 0..self.horizon {
            actions.extend_from_slice(&self.actions[h * self.num_states..(h + 1) * self.num_states]);
            actions.extend(std::iter::repeat(0).take(num_states - self.num_states));
        }
        let mut uniform_states = self.uniform_states.clone();
        uniform_states.resize(num_states, false);
        Self { horizon: self.horizon, num_states, num_actions: self.num_actions, actions, uniform_states }
    }

    /// Copy with a different horizon: existing steps are kept, extra steps
    /// repeat the last tabled step.
    pub fn extended_to_horizon(&self, horizon: usize) -> Self {
        let mut actions = self.actions.clone();
        if horizon > self.horizon {
            let last = self.actions[(self.horizon - 1) * self.num_states..].to_vec();
            for _ in self.horizon..horizon {
                actions.extend_from_slice(&last);
            }
        } else {
            actions.truncate(horizon * self.num_states);
        }
        Self {
            horizon,
            num_states: self.num_states,
            num_actions: self.num_actions,
            actions,
            uniform_states: self.uniform_states.clone(),
        }
    }

    /// Checks the policy's dimensions against an MDP.
    pub fn check_compatible(&self, mdp: &TabularMDP) -> Result<(), MdpError> {
        if self.num_states != mdp.num_states() || self.num_actions != mdp.num_actions() || self.horizon != mdp.horizon()
        {
            return Err(MdpError::DimensionMismatch {
                left: "policy",
                right: "mdp",
                detail: format!(
                    "policy (S={}, A={}, H={}) vs mdp (S={}, A={}, H={})",
                    self.num_states,
                    self.num_actions,
                    self.horizon,
                    mdp.num_states(),
                    mdp.num_actions(),
                    mdp.horizon()
                ),
            });
        }
        Ok(())
    }
}

/// A policy: either one deterministic nonstationary policy or a uniform
/// mixture over a list of them (a learner's policy set, sampled one member
/// per episode).
#[derive(Debug, Clone)]
pub enum Policy {
    Deterministic(DetPolicy),
    UniformMixture(Vec<DetPolicy>),
}

impl Policy {
    /// Members viewed as a slice (a deterministic policy is a 1-mixture).
    pub fn members(&self) -> &[DetPolicy] {
        match self {
            Policy::Deterministic(p) => std::slice::from_ref(p),
            Policy::UniformMixture(ps) => ps,
        }
    }

    /// Draws the member to play for one episode.
    pub fn sample_member<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a DetPolicy {
        match self {
            Policy::Deterministic(p) => p,
            Policy::UniformMixture(ps) => {
                assert!(!ps.is_empty(), "cannot sample from an empty mixture");
                &ps[rng.gen_range(0..ps.len())]
            }
        }
    }

    pub fn check_compatible(&self, mdp: &TabularMDP) -> Result<(), MdpError> {
        for p in self.members() {
            p.check_compatible(mdp)?;
        }
        if self.members().is_empty() {
            return Err(MdpError::DimensionMismatch {
                left: "policy mixture",
                right: "mdp",
                detail: "mixture has no members".to_string(),
            });
        }
        Ok(())
    }
}

impl From<DetPolicy> for Policy {
    fn from(p: DetPolicy) -> Self {
        Policy::Deterministic(p)
    }
}

/// One environment step of a rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub h: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// One episode's realized path. May be shorter than the horizon when the
/// episode is cut at a zero-reward terminal state (nothing more can happen).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    /// Sum of realized rewards.
    pub fn total_return(&self) -> f64 {
        self.steps.iter().map(|st| st.reward).sum()
    }

    /// True when `(s, a)` is taken at some step.
    pub fn visits_pair(&self, s: usize, a: usize) -> bool {
        self.steps.iter().any(|st| st.state == s && st.action == a)
    }

    /// True when the trajectory passes through `s` (as a current state).
    pub fn visits_state(&self, s: usize) -> bool {
        self.steps.iter().any(|st| st.state == s)
    }

    /// Checks internal chaining: each step's `next_state` equals the next
    /// step's `state`, and `h` counts up from 0.
    pub fn check_consistent(&self) -> bool {
        self.steps.iter().enumerate().all(|(i, st)| {
            st.h == i && (i + 1 == self.steps.len() || st.next_state == self.steps[i + 1].state)
        })
    }
}
