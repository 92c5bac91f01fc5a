//! Reward-free reference learning: per-goal optimistic learners build a
//! policy pool whose uniformly-timed rollouts cover every reachable pair,
//! yielding a task-agnostic transition model.

use base_learners::{
    run_euler, sample_policy_returns, LearnerBudget, PolicySet, SampleMode, TransitionDataset,
};
use mdp_core::{occupancy, value_iteration, EmpiricalModel, QueryCounter, TabularMDP};
use rand_chacha::ChaCha8Rng;

use crate::config::MetaTrainConfig;
use crate::error::MetaTrainError;

/// Result of the reward-free phase on one designated task.
#[derive(Debug, Clone)]
pub struct Phase2Output {
    /// Transition counts over the task's own states, one uniformly-timed
    /// step per rollout.
    pub reference: EmpiricalModel,
    /// Goal-conditioned policy pool (trained on the sink-appended copy at
    /// the doubled horizon, so each policy has one extra state).
    pub pool: PolicySet,
    /// Exact per-pair probability that a single draw lands on each pair,
    /// laid out `[s * A + a]`.
    pub sampling_distribution: Vec<f64>,
    /// Environment steps consumed by this phase.
    pub counter: QueryCounter,
}

/// Learns a reference model of `task` without using its rewards.
///
/// For every state `g`, an optimistic learner is trained at twice the task
/// horizon on a copy where every action at `g` jumps to an appended sink and
/// only `g` pays reward; its policies are made uniform at `g` and pooled.
/// `cfg.n_rf` rollouts then each draw a pooled policy and a uniform timestep
/// and contribute that single transition to the reference counts.
///
/// # Errors
/// Propagates config, environment, and learner failures.
pub fn phase2_reward_free(
    task: &TabularMDP,
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Phase2Output, MetaTrainError> {
    cfg.validate()?;
    let (s_n, a_n) = (task.num_states(), task.num_actions());
    let doubled = 2 * task.horizon();
    let (play, sink) = task.with_sink_appended()?;
    let play = play.with_horizon(doubled)?;
    let mut sink_row = vec![0.0; play.num_states()];
    sink_row[sink] = 1.0;

    let budget = LearnerBudget::new(cfg.n_rf_euler, cfg.goal_bonus_scale, cfg.confidence)?;
    let mut counter = QueryCounter::new();
    let mut policies = Vec::with_capacity(s_n * cfg.n_rf_euler);
    let mut returns = Vec::with_capacity(s_n * cfg.n_rf_euler);
    let mut optimistic = Vec::with_capacity(s_n * cfg.n_rf_euler);
    for g in 0..s_n {
        let mut toward = play.clone();
        for a in 0..a_n {
            toward.set_row(g, a, &sink_row)?;
        }
        let mut goal_reward = vec![0.0; play.num_states() * a_n];
        for a in 0..a_n {
            goal_reward[g * a_n + a] = 1.0;
        }
        let (mut set, c) = run_euler(&toward, Some(&goal_reward), &budget, rng)?;
        counter.merge(&c);
        set.make_uniform_at(g);
        for episode in 0..set.len() {
            policies.push(set.policy(episode).clone());
            returns.push(set.returns()[episode]);
            optimistic.push(set.optimistic_values()[episode]);
        }
    }
    let pool = PolicySet::new(policies, returns, optimistic)?;

    let (dataset, c) = sample_policy_returns(&play, &pool, cfg.n_rf, SampleMode::OneUniformStep, rng)?;
    counter.merge(&c);
    let reference = restrict_model(&dataset, s_n);
    let sampling_distribution = exact_sampling_distribution(&play, &pool, s_n)?;
    Ok(Phase2Output { reference, pool, sampling_distribution, counter })
}

/// Pools harvested transitions into counts over the first `s_n` states,
/// dropping any step that touches the appended sink (unreachable in the
/// unrerouted play copy, but cheap to guard).
fn restrict_model(dataset: &TransitionDataset, s_n: usize) -> EmpiricalModel {
    let mut model = EmpiricalModel::new(s_n, dataset.num_actions);
    for &(s, a, s2) in &dataset.transitions {
        if s < s_n && s2 < s_n {
            model.record(s, a, s2);
        }
    }
    model
}

/// Exact distribution of a single pooled draw over the first `s_n` states'
/// pairs: the pool mixture's occupancy averaged over the rollout horizon.
pub fn exact_sampling_distribution(
    play: &TabularMDP,
    pool: &PolicySet,
    s_n: usize,
) -> Result<Vec<f64>, MetaTrainError> {
    let a_n = play.num_actions();
    let occ = occupancy(play, &pool.mixture())?;
    let horizon = play.horizon() as f64;
    let mut mu = vec![0.0; s_n * a_n];
    for s in 0..s_n {
        for a in 0..a_n {
            let mut total = 0.0;
            for h in 0..play.horizon() {
                total += occ.d(h, s, a);
            }
            mu[s * a_n + a] = total / horizon;
        }
    }
    Ok(mu)
}

/// Highest probability any policy gives to ever taking `(s, a)` within the
/// horizon of `mdp`, computed exactly: reroute the pair to a fresh sink, pay
/// reward only on taking it, and plan.
pub fn max_visit_probability(mdp: &TabularMDP, s: usize, a: usize) -> Result<f64, MetaTrainError> {
    let rerouted = mdp.with_pair_rerouted_to_sink(s, a)?;
    let mut rewards = vec![0.0; rerouted.num_states() * rerouted.num_actions()];
    rewards[s * rerouted.num_actions() + a] = 1.0;
    let (vt, _) = value_iteration(&rerouted.with_rewards(rewards)?, None)?;
    Ok(vt.root_value(rerouted.start_state()))
}

/// Worst pair's ratio of best-policy visit probability to the sampling mass
/// `mu` puts on it. Pairs no policy can reach are skipped; a reachable pair
/// with zero mass yields infinity.
pub fn coverage_ratio(mdp: &TabularMDP, mu: &[f64]) -> Result<f64, MetaTrainError> {
    let (s_n, a_n) = (mdp.num_states(), mdp.num_actions());
    if mu.len() != s_n * a_n {
        return Err(MetaTrainError::BadInput(format!(
            "sampling distribution has {} entries, want {}",
            mu.len(),
            s_n * a_n
        )));
    }
    let mut worst = 0.0f64;
    for s in 0..s_n {
        for a in 0..a_n {
            let reach = max_visit_probability(mdp, s, a)?;
            if reach <= 0.0 {
                continue;
            }
            let mass = mu[s * a_n + a];
            worst = worst.max(if mass > 0.0 { reach / mass } else { f64::INFINITY });
        }
    }
    Ok(worst)
}

/// Combines reference models learned on several designated tasks by keeping,
/// for each pair, the counts of whichever model observed that pair most.
///
/// # Errors
/// All models must share dimensions and at least one must be given.
pub fn merge_reference_models(models: &[EmpiricalModel]) -> Result<EmpiricalModel, MetaTrainError> {
    let first = models
        .first()
        .ok_or_else(|| MetaTrainError::BadInput("need at least one reference model".to_string()))?;
    let (s_n, a_n) = (first.num_states(), first.num_actions());
    for m in models {
        if m.num_states() != s_n || m.num_actions() != a_n {
            return Err(MetaTrainError::BadInput("reference models disagree on dimensions".to_string()));
        }
    }
    let mut merged = EmpiricalModel::new(s_n, a_n);
    for s in 0..s_n {
        for a in 0..a_n {
            let best = models.iter().max_by_key(|m| m.count(s, a)).expect("nonempty list");
            for s2 in 0..s_n {
                let n = best.count_triple(s, a, s2);
                if n > 0 {
                    merged.record_n(s, a, s2, n);
                }
            }
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use env_suite::{make_four_room_family, FourRoomSpec};
    use mdp_core::{child_rng, significance};

    fn tiny_cfg() -> MetaTrainConfig {
        // The goal learner needs enough episodes for visited pairs to drop
        // off the optimistic ceiling layer by layer; with fewer the pools
        // never push past the first room of the maze below.
        MetaTrainConfig { n_rf_euler: 400, n_rf: 400, ..MetaTrainConfig::default() }
    }

    #[test]
    fn single_state_task_spreads_mass_uniformly_over_actions() {
        // Both actions stay put. The state pays reward so rollouts run the
        // full horizon instead of stopping at a zero-reward terminal.
        let rows = vec![1.0, 1.0];
        let mdp = TabularMDP::new(1, 2, 2, 0, vec![1.0, 1.0], rows).unwrap();
        let mut rng = child_rng(11, &[0]);
        let out = phase2_reward_free(&mdp, &tiny_cfg(), &mut rng).unwrap();
        // The only state is its own goal, so every pooled policy is uniform
        // there and each action gets half the mass.
        for (a, &mass) in out.sampling_distribution.iter().enumerate() {
            assert!((mass - 0.5).abs() < 1e-12, "action {a} got mass {mass}");
        }
        assert!(out.reference.count(0, 0) > 0 && out.reference.count(0, 1) > 0);
        let total = out.reference.count(0, 0) + out.reference.count(0, 1);
        assert_eq!(total, 400, "one transition per draw");
    }

    #[test]
    fn reachable_states_all_get_positive_sampling_mass() {
        let open = FourRoomSpec {
            side: 4,
            horizon: 10,
            slip: 0.0,
            dummy_start: true,
            gates_open: [true; 4],
            start_cell: (0, 0),
            goal_cell: (3, 3),
        };
        let closed = FourRoomSpec { gates_open: [false; 4], start_cell: (0, 3), ..open };
        let family = make_four_room_family(&[open, closed]).unwrap();
        let task = family.task(0);
        let mut rng = child_rng(12, &[0]);
        let out = phase2_reward_free(task, &tiny_cfg(), &mut rng).unwrap();
        let a_n = task.num_actions();
        let doubled = task.with_horizon(2 * task.horizon()).unwrap();
        for s in 0..task.num_states() {
            let reach = significance(&doubled, s, None).unwrap();
            if reach < 0.2 {
                continue;
            }
            for a in 0..a_n {
                assert!(
                    out.sampling_distribution[s * a_n + a] > 0.0,
                    "state {s} is reachable (prob {reach:.2}) but action {a} got no mass"
                );
            }
        }
    }

    #[test]
    fn coverage_ratio_stays_within_the_pair_count_bound() {
        // Fully stochastic rows keep every pair reachable, so the ratio is
        // finite and must stay within 4·S·A·(2H) with slack.
        let mut gen_cfg = mdp_core::gen::RandomMdpConfig::new(12, 2, 6);
        gen_cfg.deterministic_row_prob = 0.0;
        let mdp = mdp_core::gen::random_mdp(&gen_cfg, &mut child_rng(13, &[0]));
        let mut rng = child_rng(13, &[1]);
        let out = phase2_reward_free(&mdp, &tiny_cfg(), &mut rng).unwrap();
        let doubled = mdp.with_horizon(2 * mdp.horizon()).unwrap();
        let ratio = coverage_ratio(&doubled, &out.sampling_distribution).unwrap();
        let bound = 4.0 * 12.0 * 2.0 * (2.0 * 6.0) * 1.25;
        assert!(ratio.is_finite() && ratio <= bound, "ratio {ratio} exceeds {bound}");
        let mass: f64 = out.sampling_distribution.iter().sum();
        assert!((mass - 1.0).abs() < 1e-9, "one draw lands on exactly one pair, got mass {mass}");
    }

    #[test]
    fn merged_references_keep_the_best_observed_rows() {
        let mut a = EmpiricalModel::new(2, 1);
        a.record_n(0, 0, 1, 5);
        let mut b = EmpiricalModel::new(2, 1);
        b.record_n(0, 0, 0, 2);
        b.record_n(1, 0, 1, 9);
        let merged = merge_reference_models(&[a, b]).unwrap();
        assert_eq!(merged.count_triple(0, 0, 1), 5, "first model saw row (0,0) more");
        assert_eq!(merged.count_triple(1, 0, 1), 9, "second model is the only source for row (1,0)");
        assert!(merge_reference_models(&[]).is_err());
        let wrong = EmpiricalModel::new(3, 1);
        assert!(merge_reference_models(&[merged, wrong]).is_err());
    }
}
