//! Exhaustive baseline: for every task and state, train policies that reach
//! the state, force each action there, and compare the resulting rows across
//! tasks. Finds the same exits as the detection loop but pays for a full
//! sweep of task x state x action probes.

use base_learners::{run_euler, sample_policy_returns, LearnerBudget, PolicySet, SampleMode};
use env_suite::TaskFamily;
use mdp_core::{tv_distance, EmpiricalModel, QueryCounter};
use rand_chacha::ChaCha8Rng;

use crate::config::MetaTrainConfig;
use crate::error::MetaTrainError;
use crate::exits::ExitTable;

/// Probes every (task, state, action) and flags the pairs whose estimated
/// rows differ across tasks by more than half the separation at trusted
/// sample counts.
///
/// Budgets are shared with the exit learner: `cfg.n_el_euler` episodes train
/// each state-reaching pool, `cfg.n_el` rollouts probe each action, and
/// `cfg.n_ed_thresh` gates which row estimates may be compared. States the
/// pool never reaches simply contribute no counts.
///
/// # Errors
/// Propagates config and learner failures.
pub fn brute_force_hierarchy(
    family: &TaskFamily,
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(ExitTable, QueryCounter), MetaTrainError> {
    cfg.validate()?;
    let (s_n, a_n, t_n) = (family.num_states(), family.num_actions(), family.num_tasks());
    let budget = LearnerBudget::new(cfg.n_el_euler, cfg.goal_bonus_scale, cfg.confidence)?;
    let mut counter = QueryCounter::new();
    let mut models = vec![EmpiricalModel::new(s_n, a_n); t_n];
    for (t, model) in models.iter_mut().enumerate() {
        let task = family.task(t);
        let (play, sink) = task.with_sink_appended()?;
        let mut sink_row = vec![0.0; play.num_states()];
        sink_row[sink] = 1.0;
        for s in 0..s_n {
            // Policies rewarded for reaching s, trained on a copy where s is
            // absorbing so reaching it once is all that counts.
            let mut toward = play.clone();
            let mut state_reward = vec![0.0; play.num_states() * a_n];
            for a in 0..a_n {
                toward.set_row(s, a, &sink_row)?;
                state_reward[s * a_n + a] = 1.0;
            }
            let (set, c) = run_euler(&toward, Some(&state_reward), &budget, rng)?;
            counter.merge(&c);
            for a in 0..a_n {
                // Force the probed action whenever the rollout stands at s.
                let probing: Vec<_> = set
                    .policies()
                    .iter()
                    .map(|p| {
                        let mut q = p.clone();
                        q.override_state_action(s, a);
                        q
                    })
                    .collect();
                let pool = PolicySet::new(
                    probing,
                    set.returns().to_vec(),
                    set.optimistic_values().to_vec(),
                )?;
                let (dataset, c) =
                    sample_policy_returns(&play, &pool, cfg.n_el, SampleMode::AllTransitions, rng)?;
                counter.merge(&c);
                for &(s1, a1, s2) in &dataset.transitions {
                    if s1 < s_n && s2 < s_n {
                        model.record(s1, a1, s2);
                    }
                }
            }
        }
    }

    let mut exits = ExitTable::new(t_n, s_n, a_n);
    for s in 0..s_n {
        for a in 0..a_n {
            let trusted: Vec<usize> =
                (0..t_n).filter(|&t| models[t].count(s, a) >= cfg.n_ed_thresh).collect();
            let mut differs = false;
            'compare: for (i, &t) in trusted.iter().enumerate() {
                let row_t = models[t].estimated_row(s, a, cfg.n_ed_thresh);
                for &u in &trusted[i + 1..] {
                    let row_u = models[u].estimated_row(s, a, cfg.n_ed_thresh);
                    if tv_distance(&row_t, &row_u)? > cfg.beta / 2.0 {
                        differs = true;
                        break 'compare;
                    }
                }
            }
            if differs {
                exits.flag(s, a);
                for t in 0..t_n {
                    if models[t].count(s, a) > 0 {
                        exits.set_task_row(t, s, a, &models[t].estimated_row(s, a, 1))?;
                    }
                }
            }
        }
    }
    Ok((exits, counter))
}
