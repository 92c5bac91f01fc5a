//! Task-learning phase: solve each task with an optimistic learner, then
//! harvest transitions and returns from the learned policy mixture.

use base_learners::{run_ucbvi, sample_policy_returns, LearnerBudget, PolicySet, SampleMode};
use env_suite::TaskFamily;
use mdp_core::{child_rng, EmpiricalModel, QueryCounter};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::MetaTrainConfig;
use crate::error::MetaTrainError;

/// Per-task output of the task-learning phase.
#[derive(Debug, Clone)]
pub struct Phase1Task {
    /// Raw transition counts harvested from the mixture rollouts.
    pub model: EmpiricalModel,
    /// Mean rollout return: the task's optimal-value estimate.
    pub value_estimate: f64,
    /// Every episode policy the learner produced.
    pub policies: PolicySet,
}

/// Runs the learner and the mixture harvest on every task.
///
/// Tasks are independent: each gets its own child generator, so results do
/// not depend on scheduling. Thresholding to zero out thin rows happens when
/// models are estimated downstream, keeping the raw counts intact here.
///
/// # Errors
/// Propagates learner failures; budgets must satisfy
/// [`MetaTrainConfig::validate`].
pub fn phase1_task_learning(
    family: &TaskFamily,
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Phase1Task>, QueryCounter), MetaTrainError> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..family.num_tasks()).map(|_| rng.gen()).collect();
    let results: Vec<Result<(Phase1Task, QueryCounter), MetaTrainError>> = seeds
        .par_iter()
        .enumerate()
        .map(|(t, &seed)| {
            let mut task_rng = child_rng(seed, &[t as u64]);
            let task = family.task(t);
            let budget = LearnerBudget::new(cfg.n_ucbvi, cfg.bonus_scale, cfg.confidence)?;
            let (policies, mut counter) = run_ucbvi(task, &budget, &mut task_rng)?;
            let (dataset, sample_counter) =
                sample_policy_returns(task, &policies, cfg.n_ts, SampleMode::AllTransitions, &mut task_rng)?;
            counter.merge(&sample_counter);
            let out = Phase1Task {
                model: dataset.to_model(),
                value_estimate: dataset.mean_return(),
                policies,
            };
            Ok((out, counter))
        })
        .collect();
    let mut tasks = Vec::with_capacity(results.len());
    let mut counter = QueryCounter::new();
    for result in results {
        let (task, task_counter) = result?;
        counter.merge(&task_counter);
        tasks.push(task);
    }
    Ok((tasks, counter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use env_suite::{make_shortcut_family, TaskFamily, SHORTCUT_DOOR};
    use mdp_core::value_iteration;

    fn shortcut_family() -> TaskFamily {
        make_shortcut_family().expect("fixture family is valid")
    }

    #[test]
    fn learned_values_and_gate_visits_match_the_tasks() {
        let family = shortcut_family();
        // Bonus scale 0.3 keeps unvisited pairs at the optimistic ceiling
        // (a greedier learner locks onto the long route and never tries the
        // door) while letting ties resolve well inside the episode budget.
        let cfg = MetaTrainConfig {
            n_ucbvi: 5000,
            n_ts: 300,
            n_ts_thresh: 100,
            bonus_scale: 0.3,
            ..Default::default()
        };
        let mut rng = child_rng(11, &[0]);
        let (tasks, counter) = phase1_task_learning(&family, &cfg, &mut rng).unwrap();
        assert_eq!(tasks.len(), 2);
        assert_eq!(
            counter.total(),
            2 * (5000 + 300) as u64 * family.horizon() as u64,
            "every learner and harvest episode runs the full horizon"
        );
        for (t, task) in tasks.iter().enumerate() {
            let (vt, _) = value_iteration(family.task(t), None).unwrap();
            let v_star = vt.root_value(family.start_state());
            assert!(
                (task.value_estimate - v_star).abs() <= 1.0 / 3.0,
                "task {t} estimate {} vs optimal {v_star}",
                task.value_estimate
            );
        }
        // The shortcut task's optimal route uses the door, so its row clears
        // the threshold; the long-route task never gathers that many visits.
        let (door_s, door_a) = SHORTCUT_DOOR;
        let open = tasks[1].model.estimate(cfg.n_ts_thresh);
        assert!(open.is_known(door_s, door_a), "the shortcut task must populate the door row");
        let blocked = tasks[0].model.estimate(cfg.n_ts_thresh);
        assert!(
            !blocked.is_known(door_s, door_a),
            "the long-route task's near-optimal mixture avoids the door"
        );
    }

    #[test]
    fn zero_reward_task_reports_a_zero_value() {
        let family = shortcut_family();
        let zeroed = family.task(0).with_rewards(vec![0.0; 6 * 2]).unwrap();
        let fam2 = env_suite::TaskFamily::new(
            vec![zeroed, family.task(1).clone()],
            family.hierarchy().clone(),
            family.separation(),
        )
        .unwrap();
        let cfg = MetaTrainConfig { n_ucbvi: 60, n_ts: 40, n_ts_thresh: 5, ..Default::default() };
        let mut rng = child_rng(12, &[0]);
        let (tasks, _) = phase1_task_learning(&fam2, &cfg, &mut rng).unwrap();
        assert_eq!(tasks[0].value_estimate, 0.0, "no reward can be collected");
    }

    #[test]
    fn identical_seeds_reproduce_phase_output() {
        let family = shortcut_family();
        let cfg = MetaTrainConfig { n_ucbvi: 50, n_ts: 30, n_ts_thresh: 5, ..Default::default() };
        let (a, _) = phase1_task_learning(&family, &cfg, &mut child_rng(3, &[7])).unwrap();
        let (b, _) = phase1_task_learning(&family, &cfg, &mut child_rng(3, &[7])).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.value_estimate, y.value_estimate);
            assert_eq!(x.model.raw_counts(), y.model.raw_counts());
        }
    }
}
