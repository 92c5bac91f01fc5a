//! Episode-indexed policy sets produced by the learners, and rollout-based
//! harvesting of transitions and returns from them.

use mdp_core::textio::{format_f64, parse_f64, parse_usize};
use mdp_core::{simulate_episode, DetPolicy, EmpiricalModel, Policy, QueryCounter, TabularMDP};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::LearnerError;

/// Episode budget and exploration-bonus calibration for one learner run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerBudget {
    pub num_episodes: usize,
    pub bonus_scale: f64,
    pub confidence: f64,
}

impl LearnerBudget {
    /// # Errors
    /// Requires at least one episode, a positive bonus scale, and a
    /// confidence level strictly inside (0, 1).
    pub fn new(num_episodes: usize, bonus_scale: f64, confidence: f64) -> Result<Self, LearnerError> {
        if num_episodes == 0 {
            return Err(LearnerError::BadBudget("need at least one episode".to_string()));
        }
        if !(bonus_scale > 0.0) {
            return Err(LearnerError::BadBudget(format!("bonus scale must be positive, got {bonus_scale}")));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(LearnerError::BadBudget(format!("confidence must be in (0, 1), got {confidence}")));
        }
        Ok(Self { num_episodes, bonus_scale, confidence })
    }
}

/// The policies a learner played, one per episode, with realized returns and
/// the root optimistic value that selected each policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySet {
    policies: Vec<DetPolicy>,
    returns: Vec<f64>,
    optimistic_values: Vec<f64>,
}

impl PolicySet {
    /// # Errors
    /// The three lists must be non-empty and of equal length.
    pub fn new(
        policies: Vec<DetPolicy>,
        returns: Vec<f64>,
        optimistic_values: Vec<f64>,
    ) -> Result<Self, LearnerError> {
        if policies.is_empty() {
            return Err(LearnerError::EmptyPolicySet);
        }
        if policies.len() != returns.len() || policies.len() != optimistic_values.len() {
            return Err(LearnerError::BadEnv(format!(
                "policy/return/value lengths differ: {} / {} / {}",
                policies.len(),
                returns.len(),
                optimistic_values.len()
            )));
        }
        Ok(Self { policies, returns, optimistic_values })
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn policies(&self) -> &[DetPolicy] {
        &self.policies
    }

    pub fn policy(&self, episode: usize) -> &DetPolicy {
        &self.policies[episode]
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn optimistic_values(&self) -> &[f64] {
        &self.optimistic_values
    }

    pub fn mean_return(&self) -> f64 {
        self.returns.iter().sum::<f64>() / self.returns.len() as f64
    }

    /// Cumulative regret against a fixed per-episode reference value.
    pub fn cumulative_regret(&self, optimal_value: f64) -> f64 {
        self.returns.iter().map(|r| optimal_value - r).sum()
    }

    /// The uniform mixture over all recorded policies.
    pub fn mixture(&self) -> Policy {
        Policy::UniformMixture(self.policies.clone())
    }

    /// Marks every policy as uniform over actions at `state`.
    pub fn make_uniform_at(&mut self, state: usize) {
        for p in &mut self.policies {
            p.set_uniform_at(state);
        }
    }

    pub fn all_uniform_at(&self, state: usize) -> bool {
        self.policies.iter().all(|p| p.is_uniform_at(state))
    }

    /// Plain-text serialization (same conventions as the MDP format).
    pub fn to_text(&self) -> String {
        let first = &self.policies[0];
        let (h_n, s_n, a_n) = (first.horizon(), first.num_states(), first.num_actions());
        let mut out = String::new();
        out.push_str("policy-set v1\n");
        out.push_str(&format!("dims {} {h_n} {s_n} {a_n}\n", self.len()));
        for (i, p) in self.policies.iter().enumerate() {
            out.push_str(&format!("policy {i}"));
            for h in 0..h_n {
                for s in 0..s_n {
                    out.push_str(&format!(" {}", p.action(h, s)));
                }
            }
            out.push('\n');
            let uniform: Vec<String> =
                (0..s_n).filter(|&s| p.is_uniform_at(s)).map(|s| s.to_string()).collect();
            out.push_str(&format!("uniform {i} {}", uniform.len()));
            for u in &uniform {
                out.push_str(&format!(" {u}"));
            }
            out.push('\n');
        }
        out.push_str("returns");
        for r in &self.returns {
            out.push_str(&format!(" {}", format_f64(*r)));
        }
        out.push('\n');
        out.push_str("optimistic");
        for v in &self.optimistic_values {
            out.push_str(&format!(" {}", format_f64(*v)));
        }
        out.push_str("\nend\n");
        out
    }

    /// Parses [`PolicySet::to_text`] output.
    ///
    /// # Errors
    /// Reports the first malformed line.
    pub fn from_text(text: &str) -> Result<Self, LearnerError> {
        let mut lines = text.lines().enumerate();
        let mut next_line = |want: &str| -> Result<(usize, Vec<String>), LearnerError> {
            let (idx, raw) = lines
                .next()
                .ok_or_else(|| LearnerError::Text { line: 0, message: format!("missing `{want}` line") })?;
            let toks: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
            if toks.first().map(String::as_str) != Some(want) {
                return Err(LearnerError::Text { line: idx + 1, message: format!("expected `{want}`") });
            }
            Ok((idx + 1, toks))
        };
        let (line, header) = next_line("policy-set")?;
        if header.get(1).map(String::as_str) != Some("v1") {
            return Err(LearnerError::Text { line, message: "unsupported version".to_string() });
        }
        let (line, dims) = next_line("dims")?;
        if dims.len() != 5 {
            return Err(LearnerError::Text { line, message: "dims needs 4 numbers".to_string() });
        }
        let n = parse_usize(&dims[1], line)?;
        let h_n = parse_usize(&dims[2], line)?;
        let s_n = parse_usize(&dims[3], line)?;
        let a_n = parse_usize(&dims[4], line)?;
        let mut policies = Vec::with_capacity(n);
        for i in 0..n {
            let (line, toks) = next_line("policy")?;
            if toks.len() != 2 + h_n * s_n || parse_usize(&toks[1], line)? != i {
                return Err(LearnerError::Text { line, message: format!("bad policy row {i}") });
            }
            let actions = toks[2..].iter().map(|t| parse_usize(t, line)).collect::<Result<Vec<_>, _>>()?;
            let mut p = DetPolicy::new(h_n, s_n, a_n, actions).map_err(LearnerError::from)?;
            let (line, toks) = next_line("uniform")?;
            if toks.len() < 3 || parse_usize(&toks[1], line)? != i {
                return Err(LearnerError::Text { line, message: format!("bad uniform row {i}") });
            }
            let count = parse_usize(&toks[2], line)?;
            if toks.len() != 3 + count {
                return Err(LearnerError::Text { line, message: "uniform count mismatch".to_string() });
            }
            for t in &toks[3..] {
                p.set_uniform_at(parse_usize(t, line)?);
            }
            policies.push(p);
        }
        let (line, toks) = next_line("returns")?;
        if toks.len() != 1 + n {
            return Err(LearnerError::Text { line, message: "returns length mismatch".to_string() });
        }
        let returns = toks[1..].iter().map(|t| parse_f64(t, line)).collect::<Result<Vec<_>, _>>()?;
        let (line, toks) = next_line("optimistic")?;
        if toks.len() != 1 + n {
            return Err(LearnerError::Text { line, message: "optimistic length mismatch".to_string() });
        }
        let optimistic = toks[1..].iter().map(|t| parse_f64(t, line)).collect::<Result<Vec<_>, _>>()?;
        next_line("end")?;
        Self::new(policies, returns, optimistic)
    }
}

/// How rollout transitions are harvested by [`sample_policy_returns`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Keep every `(s, a, s')` step of each sampled trajectory.
    AllTransitions,
    /// Keep a single step at a timestep drawn uniformly from the horizon.
    OneUniformStep,
}

/// Transitions and per-sample returns harvested from mixture rollouts.
#[derive(Debug, Clone)]
pub struct TransitionDataset {
    pub num_states: usize,
    pub num_actions: usize,
    pub transitions: Vec<(usize, usize, usize)>,
    pub returns: Vec<f64>,
}

impl TransitionDataset {
    /// Pools the transitions into per-pair counts.
    pub fn to_model(&self) -> EmpiricalModel {
        let mut model = EmpiricalModel::new(self.num_states, self.num_actions);
        for &(s, a, s2) in &self.transitions {
            model.record(s, a, s2);
        }
        model
    }

    pub fn mean_return(&self) -> f64 {
        if self.returns.is_empty() {
            return 0.0;
        }
        self.returns.iter().sum::<f64>() / self.returns.len() as f64
    }
}

/// Rolls out `n_samples` episodes, each under a policy drawn uniformly from
/// `set`, harvesting transitions per `mode` and recording every realized
/// return under the MDP's own rewards.
///
/// # Errors
/// Rejects empty policy sets, `n_samples = 0`, and policies incompatible with
/// the MDP.
pub fn sample_policy_returns(
    mdp: &TabularMDP,
    set: &PolicySet,
    n_samples: usize,
    mode: SampleMode,
    rng: &mut ChaCha8Rng,
) -> Result<(TransitionDataset, QueryCounter), LearnerError> {
    if set.is_empty() {
        return Err(LearnerError::EmptyPolicySet);
    }
    if n_samples == 0 {
        return Err(LearnerError::BadBudget("need at least one sample".to_string()));
    }
    let mut counter = QueryCounter::new();
    let mut dataset = TransitionDataset {
        num_states: mdp.num_states(),
        num_actions: mdp.num_actions(),
        transitions: Vec::new(),
        returns: Vec::with_capacity(n_samples),
    };
    for _ in 0..n_samples {
        let idx = rng.gen_range(0..set.len());
        let keep = match mode {
            SampleMode::AllTransitions => None,
            SampleMode::OneUniformStep => Some(rng.gen_range(0..mdp.horizon())),
        };
        let policy = Policy::Deterministic(set.policy(idx).clone());
        let trajectory = simulate_episode(mdp, &policy, rng, &mut counter)?;
        for step in &trajectory.steps {
            if keep.is_none() || keep == Some(step.h) {
                dataset.transitions.push((step.state, step.action, step.next_state));
            }
        }
        dataset.returns.push(trajectory.total_return());
    }
    Ok((dataset, counter))
}
