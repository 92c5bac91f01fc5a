//! Seeded random-instance generators for tests and benchmarks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::TabularMDP;
use crate::policy::DetPolicy;

/// Shape of random instances produced by [`random_mdp`].
#[derive(Debug, Clone, Copy)]
pub struct RandomMdpConfig {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    /// Probability that a row is a point mass on a random state.
    pub deterministic_row_prob: f64,
    /// Probability that a pair has a nonzero reward (drawn uniform in [0,1]).
    pub reward_density: f64,
}

impl RandomMdpConfig {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        Self { num_states, num_actions, horizon, deterministic_row_prob: 0.4, reward_density: 0.35 }
    }

    /// All rows become point masses (a deterministic MDP).
    pub fn deterministic(mut self) -> Self {
        self.deterministic_row_prob = 1.0;
        self
    }
}

fn random_row(num_states: usize, deterministic: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut row = vec![0.0; num_states];
    if deterministic {
        row[rng.gen_range(0..num_states)] = 1.0;
        return row;
    }
    // Exponential weights renormalize to a Dirichlet(1,...,1) draw; keep a
    // small random support so sparse instances appear too.
    let support = rng.gen_range(1..=num_states);
    let mut picked: Vec<usize> = (0..num_states).collect();
    for i in 0..support {
        let j = rng.gen_range(i..num_states);
        picked.swap(i, j);
    }
    let mut total = 0.0;
    for &s in &picked[..support] {
        let w = -(1.0 - rng.gen::<f64>()).ln();
        row[s] = w;
        total += w;
    }
    for p in row.iter_mut() {
        *p /= total;
    }
    row
}

/// Draws a random MDP (row-sum-exact by construction) with start state 0.
pub fn random_mdp(cfg: &RandomMdpConfig, rng: &mut ChaCha8Rng) -> TabularMDP {
    let (s_n, a_n) = (cfg.num_states, cfg.num_actions);
    let mut rewards = vec![0.0; s_n * a_n];
    let mut rows = Vec::with_capacity(s_n * a_n * s_n);
    for r in rewards.iter_mut() {
        if rng.gen::<f64>() < cfg.reward_density {
            *r = rng.gen::<f64>();
        }
    }
    for _s in 0..s_n {
        for _a in 0..a_n {
            let deterministic = rng.gen::<f64>() < cfg.deterministic_row_prob;
            rows.extend_from_slice(&random_row(s_n, deterministic, rng));
        }
    }
    TabularMDP::new(s_n, a_n, cfg.horizon, 0, rewards, rows).expect("generated rows are valid")
}

/// Draws a uniformly random deterministic nonstationary policy.
pub fn random_policy(num_states: usize, num_actions: usize, horizon: usize, rng: &mut ChaCha8Rng) -> DetPolicy {
    let actions = (0..horizon * num_states).map(|_| rng.gen_range(0..num_actions)).collect();
    DetPolicy::new(horizon, num_states, num_actions, actions).expect("generated actions are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::child_rng;

    #[test]
    fn generated_instances_are_valid_and_seed_deterministic() {
        let cfg = RandomMdpConfig::new(5, 3, 4);
        let a = random_mdp(&cfg, &mut child_rng(7, &[0]));
        let b = random_mdp(&cfg, &mut child_rng(7, &[0]));
        assert_eq!(a, b, "same stream, same instance");
        a.check_fully_stochastic().expect("no dead ends in generated MDPs");
        for s in 0..5 {
            for a_i in 0..3 {
                let sum: f64 = a.stationary_row(s, a_i).iter().sum();
                assert!((sum - 1.0).abs() < 1e-13, "rows sum to 1 within a few ulp after construction");
            }
        }
    }

    #[test]
    fn deterministic_config_yields_point_mass_rows() {
        let cfg = RandomMdpConfig::new(4, 2, 3).deterministic();
        let m = random_mdp(&cfg, &mut child_rng(9, &[1]));
        for s in 0..4 {
            for a in 0..2 {
                assert!(m.stationary_row(s, a).iter().all(|&p| p == 0.0 || p == 1.0));
            }
        }
    }
}
