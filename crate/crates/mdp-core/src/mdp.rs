//! Finite-horizon tabular MDP representation.
//!
//! A [`TabularMDP`] stores stationary dynamics `P(s'|s,a)`, a reward table
//! `r(s,a) ∈ [0,1]`, a horizon `H`, and a start state. An optional
//! per-timestep dynamics table `P^(h)(s'|s,a)` supports planning problems
//! whose transition model changes with the step index (used by the optimistic
//! multi-model planner).
//!
//! Rows are validated on construction: a row must either sum to 1 within
//! [`ROW_SUM_TOLERANCE`] (it is rescaled unless already within a few ulp,
//! an idempotent rule that keeps text round-trips bit-stable) or be all-zero.
//! An all-zero row encodes a dead end: once such a pair is taken the episode
//! yields no further reward. Environment constructors never produce dead-end
//! rows; they arise in planning problems assembled from empirical estimates,
//! where an all-zero row is the "unknown" encoding.

use crate::error::MdpError;

/// Tolerance for accepting a transition row's sum as 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Finite-horizon tabular MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMDP {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    start_state: usize,
    /// Rewards, laid out as `[s * A + a]`.
    rewards: Vec<f64>,
    /// Stationary transition rows, laid out as `[(s * A + a) * S + s']`.
    rows: Vec<f64>,
    /// Optional per-timestep rows, laid out as `[((h * S + s) * A + a) * S + s']`.
    /// When present they take precedence over the stationary table.
    per_step: Option<Vec<f64>>,
    /// Per-state terminal flag: `P(s|s,a) = 1` for every action (and every
    /// timestep, for per-step dynamics).
    terminal: Vec<bool>,
}

/// Validates one transition row in place.
///
/// Accepts an all-zero row unchanged. Otherwise requires non-negative finite
/// entries summing to 1 within [`ROW_SUM_TOLERANCE`]. Rows whose sum is off
/// by more than a few ulp are rescaled; rows already canonical (sum within
/// `64·ε·S` of 1) are left bit-untouched, which makes normalization
/// idempotent and text round-trips byte-exact.
fn normalize_row(row: &mut [f64], state: usize, action: usize) -> Result<(), MdpError> {
    let mut sum = 0.0;
    for &p in row.iter() {
        if !p.is_finite() || p < 0.0 {
            return Err(MdpError::BadRowEntry { state, action });
        }
        sum += p;
    }
    if sum == 0.0 {
        return Ok(());
    }
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(MdpError::BadRowSum { state, action, sum });
    }
    let canonical_eps = 64.0 * f64::EPSILON * row.len() as f64;
    if (sum - 1.0).abs() > canonical_eps {
        for p in row.iter_mut() {
            *p /= sum;
        }
        // After rescaling the residual is a handful of ulp, inside the
        // canonical band, so re-normalizing is a no-op.
    }
    Ok(())
}

fn validate_rewards(rewards: &[f64], num_actions: usize) -> Result<(), MdpError> {
    for (i, &r) in rewards.iter().enumerate() {
        if !r.is_finite() || !(0.0..=1.0).contains(&r) {
            return Err(MdpError::BadReward { state: i / num_actions, action: i % num_actions, value: r });
        }
    }
    Ok(())
}

impl TabularMDP {
    /// Builds an MDP with stationary dynamics.
    ///
    /// `rewards` is laid out as `[s * A + a]` and `rows` as
    /// `[(s * A + a) * S + s']`.
    ///
    /// # Errors
    /// Rejects shape mismatches, out-of-range start states, rewards outside
    /// `[0, 1]`, and rows that neither sum to 1 within tolerance nor are
    /// all-zero.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        start_state: usize,
        rewards: Vec<f64>,
        rows: Vec<f64>,
    ) -> Result<Self, MdpError> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(MdpError::IndexOutOfRange { what: "dimension", index: 0, bound: 1 });
        }
        if start_state >= num_states {
            return Err(MdpError::IndexOutOfRange { what: "start state", index: start_state, bound: num_states });
        }
        if rewards.len() != num_states * num_actions {
            return Err(MdpError::ShapeMismatch {
                what: "rewards",
                expected: num_states * num_actions,
                got: rewards.len(),
            });
        }
        if rows.len() != num_states * num_actions * num_states {
            return Err(MdpError::ShapeMismatch {
                what: "transition rows",
                expected: num_states * num_actions * num_states,
                got: rows.len(),
            });
        }
        validate_rewards(&rewards, num_actions)?;
        let mut rows = rows;
        for s in 0..num_states {
            for a in 0..num_actions {
                let base = (s * num_actions + a) * num_states;
                normalize_row(&mut rows[base..base + num_states], s, a)?;
            }
        }
        let terminal = compute_terminal_stationary(num_states, num_actions, &rows);
        Ok(Self { num_states, num_actions, horizon, start_state, rewards, rows, per_step: None, terminal })
    }

    /// Builds an MDP whose dynamics vary with the timestep.
    ///
    /// `per_step` is laid out as `[((h * S + s) * A + a) * S + s']`; the
    /// stationary table is ignored by planners and is set to the `h = 0`
    /// slice for inspection convenience.
    pub fn new_per_step(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        start_state: usize,
        rewards: Vec<f64>,
        per_step: Vec<f64>,
    ) -> Result<Self, MdpError> {
        let slice = num_states * num_actions * num_states;
        if per_step.len() != horizon * slice {
            return Err(MdpError::ShapeMismatch { what: "per-step rows", expected: horizon * slice, got: per_step.len() });
        }
        let stationary = per_step[..slice].to_vec();
        let mut mdp = Self::new(num_states, num_actions, horizon, start_state, rewards, stationary)?;
        let mut per_step = per_step;
        for h in 0..horizon {
            for s in 0..num_states {
                for a in 0..num_actions {
                    let base = ((h * num_states + s) * num_actions + a) * num_states;
                    normalize_row(&mut per_step[base..base + num_states], s, a)?;
                }
            }
        }
        // A state is terminal only if it self-loops at every timestep.
        let mut terminal = vec![true; num_states];
        for h in 0..horizon {
            for (s, flag) in terminal.iter_mut().enumerate() {
                for a in 0..num_actions {
                    let base = ((h * num_states + s) * num_actions + a) * num_states;
                    if per_step[base + s] < 1.0 - 1e-12 {
                        *flag = false;
                    }
                }
            }
        }
        mdp.per_step = Some(per_step);
        mdp.terminal = terminal;
        Ok(mdp)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn start_state(&self) -> usize {
        self.start_state
    }

    /// True when the dynamics table varies with the timestep.
    pub fn is_per_step(&self) -> bool {
        self.per_step.is_some()
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.num_actions + a]
    }

    /// Full reward table, laid out as `[s * A + a]`.
    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Transition row in effect at timestep `h`.
    pub fn row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        match &self.per_step {
            Some(table) => {
                let base = ((h * self.num_states + s) * self.num_actions + a) * self.num_states;
                &table[base..base + self.num_states]
            }
            None => self.stationary_row(s, a),
        }
    }

    /// Stationary transition row (the `h = 0` slice for per-step dynamics).
    pub fn stationary_row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.num_actions + a) * self.num_states;
        &self.rows[base..base + self.num_states]
    }

    /// True when the row in effect at `(h, s, a)` is the all-zero dead end.
    pub fn is_dead_end(&self, h: usize, s: usize, a: usize) -> bool {
        self.row(h, s, a).iter().all(|&p| p == 0.0)
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    /// True when `s` is terminal and every action reward at `s` is zero, so
    /// an episode sitting there can never collect anything again.
    pub fn is_zero_reward_terminal(&self, s: usize) -> bool {
        self.terminal[s] && (0..self.num_actions).all(|a| self.reward(s, a) == 0.0)
    }

    /// Asserts that every row is a proper probability row (no dead ends).
    ///
    /// Environment MDPs must satisfy this; planning problems assembled from
    /// empirical estimates may not.
    pub fn check_fully_stochastic(&self) -> Result<(), MdpError> {
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                for h in 0..if self.per_step.is_some() { self.horizon } else { 1 } {
                    if self.is_dead_end(h, s, a) {
                        return Err(MdpError::UnknownRow { state: s, action: a });
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with a different horizon (stationary dynamics only).
    pub fn with_horizon(&self, horizon: usize) -> Result<Self, MdpError> {
        if self.per_step.is_some() {
            return Err(MdpError::DimensionMismatch {
                left: "per-step MDP",
                right: "horizon override",
                detail: "per-step dynamics are tied to their horizon".to_string(),
            });
        }
        let mut out = self.clone();
        out.horizon = horizon.max(1);
        Ok(out)
    }

    /// Copy with a replacement reward table (same layout as [`Self::rewards`]).
    pub fn with_rewards(&self, rewards: Vec<f64>) -> Result<Self, MdpError> {
        if rewards.len() != self.num_states * self.num_actions {
            return Err(MdpError::ShapeMismatch {
                what: "rewards",
                expected: self.num_states * self.num_actions,
                got: rewards.len(),
            });
        }
        validate_rewards(&rewards, self.num_actions)?;
        let mut out = self.clone();
        out.rewards = rewards;
        Ok(out)
    }

    /// Copy with a different start state.
    pub fn with_start_state(&self, start: usize) -> Result<Self, MdpError> {
        if start >= self.num_states {
            return Err(MdpError::IndexOutOfRange { what: "start state", index: start, bound: self.num_states });
        }
        let mut out = self.clone();
        out.start_state = start;
        Ok(out)
    }

    /// Replaces one stationary transition row (re-validated) and recomputes
    /// terminal flags. Stationary dynamics only.
    pub fn set_row(&mut self, s: usize, a: usize, row: &[f64]) -> Result<(), MdpError> {
        if self.per_step.is_some() {
            return Err(MdpError::DimensionMismatch {
                left: "per-step MDP",
                right: "row replacement",
                detail: "replace rows before attaching per-step dynamics".to_string(),
            });
        }
        if row.len() != self.num_states {
            return Err(MdpError::ShapeMismatch { what: "row", expected: self.num_states, got: row.len() });
        }
        let mut row = row.to_vec();
        normalize_row(&mut row, s, a)?;
        let base = (s * self.num_actions + a) * self.num_states;
        self.rows[base..base + self.num_states].copy_from_slice(&row);
        self.terminal = compute_terminal_stationary(self.num_states, self.num_actions, &self.rows);
        Ok(())
    }

    /// Replaces one reward entry.
    pub fn set_reward(&mut self, s: usize, a: usize, r: f64) -> Result<(), MdpError> {
        if !r.is_finite() || !(0.0..=1.0).contains(&r) {
            return Err(MdpError::BadReward { state: s, action: a, value: r });
        }
        self.rewards[s * self.num_actions + a] = r;
        Ok(())
    }

    /// Copy with one extra zero-reward absorbing sink state appended; returns
    /// the copy and the sink's index. Stationary dynamics only.
    pub fn with_sink_appended(&self) -> Result<(Self, usize), MdpError> {
        if self.per_step.is_some() {
            return Err(MdpError::DimensionMismatch {
                left: "per-step MDP",
                right: "sink append",
                detail: "append sinks before attaching per-step dynamics".to_string(),
            });
        }
        let (s_n, a_n) = (self.num_states, self.num_actions);
        let sink = s_n;
        let mut rewards = Vec::with_capacity((s_n + 1) * a_n);
        let mut rows = Vec::with_capacity((s_n + 1) * a_n * (s_n + 1));
        for s in 0..s_n {
            for a in 0..a_n {
                rewards.push(self.reward(s, a));
                rows.extend_from_slice(self.stationary_row(s, a));
                rows.push(0.0);
            }
        }
        for _a in 0..a_n {
            rewards.push(0.0);
            let mut row = vec![0.0; s_n + 1];
            row[sink] = 1.0;
            rows.extend_from_slice(&row);
        }
        let out = Self::new(s_n + 1, a_n, self.horizon, self.start_state, rewards, rows)?;
        Ok((out, sink))
    }

    /// Copy in which taking `(s, a)` leads deterministically to a fresh
    /// zero-reward sink; every other row and all rewards are unchanged.
    ///
    /// This realizes "the pair is removed": its downstream future is erased
    /// while the immediate reward `r(s, a)` is kept.
    pub fn with_pair_rerouted_to_sink(&self, s: usize, a: usize) -> Result<Self, MdpError> {
        if s >= self.num_states {
            return Err(MdpError::IndexOutOfRange { what: "state", index: s, bound: self.num_states });
        }
        if a >= self.num_actions {
            return Err(MdpError::IndexOutOfRange { what: "action", index: a, bound: self.num_actions });
        }
        let (mut out, sink) = self.with_sink_appended()?;
        let mut row = vec![0.0; out.num_states()];
        row[sink] = 1.0;
        out.set_row(s, a, &row)?;
        Ok(out)
    }
}

fn compute_terminal_stationary(num_states: usize, num_actions: usize, rows: &[f64]) -> Vec<bool> {
    (0..num_states)
        .map(|s| {
            (0..num_actions).all(|a| {
                let base = (s * num_actions + a) * num_states;
                rows[base + s] >= 1.0 - 1e-12
            })
        })
        .collect()
}
