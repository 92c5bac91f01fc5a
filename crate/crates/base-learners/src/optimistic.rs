//! Optimistic episodic learners: every episode, plan greedily against an
//! empirical model inflated by an exploration bonus, play the plan, and fold
//! the observed transitions back into the model.
//!
//! Two bonus rules are provided: a Hoeffding-style bonus proportional to the
//! horizon, and a Bernstein-style bonus whose leading term scales with the
//! empirical variance of the next-step value (first-order in the optimal
//! value).

use mdp_core::{value_iteration, DetPolicy, QueryCounter, TabularMDP};
use rand_chacha::ChaCha8Rng;

use crate::env::{EpisodicEnv, TabularSession};
use crate::error::LearnerError;
use crate::policy_set::{LearnerBudget, PolicySet};

/// Per-pair visit counts with sparse outcome lists, so each planning backup
/// touches only the next states actually observed.
struct SparseCounts {
    num_actions: usize,
    counts: Vec<u64>,
    outcomes: Vec<Vec<(usize, u64)>>,
}

impl SparseCounts {
    fn new(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_actions,
            counts: vec![0; num_states * num_actions],
            outcomes: vec![Vec::new(); num_states * num_actions],
        }
    }

    fn record(&mut self, s: usize, a: usize, s2: usize) {
        let idx = s * self.num_actions + a;
        self.counts[idx] += 1;
        match self.outcomes[idx].iter_mut().find(|entry| entry.0 == s2) {
            Some(entry) => entry.1 += 1,
            None => self.outcomes[idx].push((s2, 1)),
        }
    }
}

/// Exploration-bonus shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BonusRule {
    /// `c_b · H · sqrt(L / max(1, N(s,a)))`.
    Hoeffding,
    /// `c_b · (sqrt(Var̂(V_next)(s,a) · L / max(1, N)) + H · L / max(1, N))`.
    Bernstein,
}

pub(crate) fn hoeffding_bonus(c_b: f64, horizon: usize, log_term: f64, n: u64) -> f64 {
    c_b * horizon as f64 * (log_term / n.max(1) as f64).sqrt()
}

pub(crate) fn bernstein_bonus(c_b: f64, variance: f64, horizon: usize, log_term: f64, n: u64) -> f64 {
    let n = n.max(1) as f64;
    c_b * ((variance.max(0.0) * log_term / n).sqrt() + horizon as f64 * log_term / n)
}

/// One optimistic planning pass over the current counts.
///
/// Returns the greedy policy and the optimistic state values at step 0.
/// Unvisited pairs get a zero next-state estimate plus the full bonus, which
/// the `[0, H - h]` clip turns into the most optimistic admissible value.
/// Equal values are broken toward the action at `tie_offset` (rotated per
/// state), so runs of all-tied plans spread over actions instead of
/// replaying one.
fn plan_optimistic(
    env: &impl EpisodicEnv,
    rewards: &[f64],
    model: &SparseCounts,
    reward_sums: &[f64],
    rule: BonusRule,
    c_b: f64,
    log_term: f64,
    tie_offset: usize,
) -> Result<(DetPolicy, Vec<f64>), LearnerError> {
    let (s_n, a_n, horizon) = (env.num_states(), env.num_actions(), env.horizon());
    let mut v_next = vec![0.0f64; s_n];
    let mut v_here = vec![0.0f64; s_n];
    let mut actions = vec![0usize; horizon * s_n];
    for h in (0..horizon).rev() {
        for s in 0..s_n {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = usize::MAX;
            for k in 0..a_n {
                let a = (k + tie_offset + s) % a_n;
                if !env.action_allowed(s, a) {
                    continue;
                }
                let idx = s * a_n + a;
                let n = model.counts[idx];
                let r = if rewards.is_empty() {
                    reward_sums[idx] / n.max(1) as f64
                } else {
                    rewards[idx]
                };
                let mut future = 0.0;
                let mut future_sq = 0.0;
                if n > 0 {
                    let inv = 1.0 / n as f64;
                    for &(s2, c) in &model.outcomes[idx] {
                        let p = c as f64 * inv;
                        future += p * v_next[s2];
                        future_sq += p * v_next[s2] * v_next[s2];
                    }
                }
                let bonus = match rule {
                    BonusRule::Hoeffding => hoeffding_bonus(c_b, horizon, log_term, n),
                    BonusRule::Bernstein => {
                        bernstein_bonus(c_b, future_sq - future * future, horizon, log_term, n)
                    }
                };
                let q = (r + future + bonus).clamp(0.0, (horizon - h) as f64);
                if q > best {
                    best = q;
                    best_a = a;
                }
            }
            if best_a == usize::MAX {
                return Err(LearnerError::BadEnv(format!("state {s} allows no action")));
            }
            v_here[s] = best;
            actions[h * s_n + s] = best_a;
        }
        std::mem::swap(&mut v_next, &mut v_here);
    }
    let policy = DetPolicy::new(horizon, s_n, a_n, actions)?;
    Ok((policy, v_next))
}

/// Runs `budget.num_episodes` episodes of optimistic learning on `env`.
///
/// When `env` knows its rewards they are planned with exactly; otherwise the
/// empirical mean reward per pair is used and the bonus absorbs the
/// estimation error.
///
/// # Errors
/// Propagates environment failures and rejects environments with a state
/// that allows no action.
pub fn run_optimistic_learner(
    env: &mut impl EpisodicEnv,
    rule: BonusRule,
    budget: &LearnerBudget,
    rng: &mut ChaCha8Rng,
) -> Result<PolicySet, LearnerError> {
    let (s_n, a_n, horizon) = (env.num_states(), env.num_actions(), env.horizon());
    let rewards = env.known_rewards().unwrap_or_default();
    if !rewards.is_empty() && rewards.len() != s_n * a_n {
        return Err(LearnerError::BadEnv(format!(
            "reward table has {} entries, want {}",
            rewards.len(),
            s_n * a_n
        )));
    }
    let n_total = budget.num_episodes;
    let log_term =
        ((s_n * a_n * horizon * n_total) as f64 / budget.confidence).ln().max(1.0);
    let mut model = SparseCounts::new(s_n, a_n);
    let mut reward_sums = vec![0.0f64; s_n * a_n];
    let mut policies = Vec::with_capacity(n_total);
    let mut returns = Vec::with_capacity(n_total);
    let mut optimistic_values = Vec::with_capacity(n_total);
    for episode in 0..n_total {
        let (policy, v0) =
            plan_optimistic(env, &rewards, &model, &reward_sums, rule, budget.bonus_scale, log_term, episode)?;
        let mut s = env.reset(rng)?;
        optimistic_values.push(v0[s]);
        let mut episode_return = 0.0;
        for h in 0..horizon {
            let a = policy.act(h, s, rng);
            let (s2, r) = env.step(s, a, rng)?;
            model.record(s, a, s2);
            reward_sums[s * a_n + a] += r;
            episode_return += r;
            s = s2;
        }
        policies.push(policy);
        returns.push(episode_return);
    }
    PolicySet::new(policies, returns, optimistic_values)
}

/// Optimistic learner with the Hoeffding bonus on a tabular task, planning
/// with the task's own (known) rewards.
///
/// # Errors
/// Rejects time-varying MDPs.
pub fn run_ucbvi(
    mdp: &TabularMDP,
    budget: &LearnerBudget,
    rng: &mut ChaCha8Rng,
) -> Result<(PolicySet, QueryCounter), LearnerError> {
    let mut session = TabularSession::new(mdp, None)?;
    let set = run_optimistic_learner(&mut session, BonusRule::Hoeffding, budget, rng)?;
    Ok((set, session.into_counter()))
}

/// Optimistic learner with the Bernstein bonus on a tabular task, planning
/// with `reward_override` when given (the task's rewards otherwise). The
/// recorded returns are under the rewards actually planned with.
///
/// # Errors
/// Rejects time-varying MDPs and malformed overrides.
pub fn run_euler(
    mdp: &TabularMDP,
    reward_override: Option<&[f64]>,
    budget: &LearnerBudget,
    rng: &mut ChaCha8Rng,
) -> Result<(PolicySet, QueryCounter), LearnerError> {
    let mut session = TabularSession::new(mdp, reward_override)?;
    let set = run_optimistic_learner(&mut session, BonusRule::Bernstein, budget, rng)?;
    Ok((set, session.into_counter()))
}

/// Exact optimal root value, shared by the tests and downstream regret
/// accounting.
pub fn optimal_value(mdp: &TabularMDP) -> Result<f64, LearnerError> {
    let (vt, _) = value_iteration(mdp, None)?;
    Ok(vt.root_value(mdp.start_state()))
}
