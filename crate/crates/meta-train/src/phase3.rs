//! The detection loop: cycle over tasks, plan optimistically with borrowed
//! rows, and whenever the plan promises more than the task's measured value,
//! chase it — the plan's rollouts expose some pair whose real dynamics differ
//! from the borrowed ones, which is exactly a cross-task exit.

use base_learners::{run_euler, sample_policy_returns, LearnerBudget, SampleMode};
use env_suite::TaskFamily;
use mdp_core::{simulate_episode, tv_distance, EmpiricalModel, Policy, QueryCounter, TabularMDP};
use rand_chacha::ChaCha8Rng;

use crate::boat::boat_vi;
use crate::config::MetaTrainConfig;
use crate::error::MetaTrainError;
use crate::exits::ExitTable;
use crate::state::MetaTrainState;

/// Estimates one task's transition row at `pair` by training goal policies
/// toward the pair and then replaying them in the unmodified task, pooling
/// every encounter of the pair.
///
/// Returns the estimated row, the number of samples behind it, and the steps
/// spent.
///
/// # Errors
/// Fails with an exit-unreachable diagnostic when fewer than
/// `cfg.n_el_thresh` encounters were collected, and propagates learner
/// failures.
pub fn learn_exit(
    mdp: &TabularMDP,
    pair: (usize, usize),
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, u64, QueryCounter), MetaTrainError> {
    let (s, a) = pair;
    let (s_n, a_n) = (mdp.num_states(), mdp.num_actions());
    if s >= s_n || a >= a_n {
        return Err(MetaTrainError::BadInput(format!(
            "pair ({s}, {a}) out of range for {s_n} states x {a_n} actions"
        )));
    }
    // Training copy: taking the pair jumps to a fresh sink and is the only
    // reward, so the learner maximizes the chance of reaching the pair once.
    let toward = mdp.with_pair_rerouted_to_sink(s, a)?;
    let mut pair_reward = vec![0.0; toward.num_states() * a_n];
    pair_reward[s * a_n + a] = 1.0;
    let budget = LearnerBudget::new(cfg.n_el_euler, cfg.goal_bonus_scale, cfg.confidence)?;
    let (set, mut counter) = run_euler(&toward, Some(&pair_reward), &budget, rng)?;

    // Replay in the task itself (sink appended only to match dimensions) and
    // harvest every pass through the pair.
    let (play, _) = mdp.with_sink_appended()?;
    let (dataset, c) = sample_policy_returns(&play, &set, cfg.n_el, SampleMode::AllTransitions, rng)?;
    counter.merge(&c);
    let mut row_counts = vec![0u64; s_n];
    let mut samples = 0u64;
    for &(s1, a1, s2) in &dataset.transitions {
        if s1 == s && a1 == a && s2 < s_n {
            row_counts[s2] += 1;
            samples += 1;
        }
    }
    if samples < cfg.n_el_thresh {
        return Err(MetaTrainError::ExitUnreachable {
            state: s,
            action: a,
            samples,
            threshold: cfg.n_el_thresh,
        });
    }
    let row = row_counts.iter().map(|&n| n as f64 / samples as f64).collect();
    Ok((row, samples, counter))
}

/// Flags `pair` and learns its row in every task, storing the rows in the
/// state's exit table. Returns whether the pair was newly flagged.
fn flag_and_learn(
    family: &TaskFamily,
    state: &mut MetaTrainState,
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
    pair: (usize, usize),
) -> Result<bool, MetaTrainError> {
    if !state.exits.flag(pair.0, pair.1) {
        return Ok(false);
    }
    for t in 0..family.num_tasks() {
        let (row, _, counter) = learn_exit(family.task(t), pair, cfg, rng)?;
        state.counters.phase3.merge(&counter);
        state.exits.set_task_row(t, pair.0, pair.1, &row)?;
    }
    Ok(true)
}

/// Direct pairwise screening: flags every pair where two tasks' learned
/// models are both populated and disagree by more than half the separation.
/// Misses pairs that some task's near-optimal data never populates; the main
/// loop exists to catch those.
///
/// Returns the newly flagged pairs.
pub fn preliminary_pairwise_pass(
    family: &TaskFamily,
    state: &mut MetaTrainState,
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>, MetaTrainError> {
    let (s_n, a_n, t_n) = (state.num_states(), state.num_actions(), state.num_tasks());
    let tables: Vec<_> = (0..t_n).map(|t| state.task_table(t, cfg.n_ts_thresh)).collect();
    let mut found = Vec::new();
    for s in 0..s_n {
        for a in 0..a_n {
            if state.exits.is_exit(s, a) {
                continue;
            }
            let known: Vec<&[f64]> =
                tables.iter().filter(|m| m.is_known(s, a)).map(|m| m.row(s, a)).collect();
            let differs = 'scan: {
                for (i, p) in known.iter().enumerate() {
                    for q in &known[i + 1..] {
                        if tv_distance(p, q)? > cfg.beta / 2.0 {
                            break 'scan true;
                        }
                    }
                }
                false
            };
            if differs && flag_and_learn(family, state, cfg, rng, (s, a))? {
                found.push((s, a));
            }
        }
    }
    Ok(found)
}

/// Runs the detection loop until a full cycle of tasks produces no new exit.
///
/// Each task visit plans with borrowed dynamics; when the plan's value beats
/// the task's measured value by more than two thirds of the coverage gap,
/// the greedy plan is rolled out and any well-visited pair whose empirical
/// row strays from some task's known row by more than half the separation is
/// flagged and learned in every task.
///
/// # Errors
/// Aborts if the loop outlives the worst-case visit count implied by the
/// pair-count cap on exits, and propagates learner failures.
pub fn phase3_detect_exits(
    family: &TaskFamily,
    state: &mut MetaTrainState,
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ExitTable, MetaTrainError> {
    cfg.validate()?;
    let t_n = family.num_tasks();
    if state.num_tasks() != t_n
        || state.num_states() != family.num_states()
        || state.num_actions() != family.num_actions()
        || state.horizon() != family.horizon()
    {
        return Err(MetaTrainError::BadInput(
            "state dimensions do not match the task family".to_string(),
        ));
    }
    if cfg.preliminary_pass {
        preliminary_pairwise_pass(family, state, cfg, rng)?;
    }
    let (s_n, a_n) = (state.num_states(), state.num_actions());
    // Every new exit resets the quiet counter, there are at most S·A exits,
    // and each quiet stretch is at most one full cycle.
    let visit_bound = (s_n * a_n + 1) * t_n;
    let mut visits = 0usize;
    let mut t = 0usize;
    while state.tasks_since_exit < t_n {
        visits += 1;
        if visits > visit_bound {
            return Err(MetaTrainError::RunawayDetection {
                visits,
                exits: state.exits.count(),
                bound: visit_bound,
            });
        }
        let task = family.task(t);
        let reference = state.exits.overlay_onto(t, &state.reference_table());
        let task_models: Vec<_> = (0..t_n)
            .map(|k| state.exits.overlay_onto(k, &state.task_table(k, cfg.n_ts_thresh)))
            .collect();
        let (tables, _) =
            boat_vi(&reference, &task_models, task.rewards(), task.horizon(), &state.exits, t + 1)?;
        let promised = tables.root(task.start_state());
        if promised - state.value_estimates[t] <= 2.0 / 3.0 * cfg.zeta {
            state.tasks_since_exit += 1;
            t = (t + 1) % t_n;
            continue;
        }
        // The plan promises value the task never showed: roll it out and
        // look for the pair whose real row betrays the borrowed one.
        let greedy = Policy::Deterministic(tables.greedy_policy());
        let mut observed = EmpiricalModel::new(s_n, a_n);
        let mut counter = QueryCounter::new();
        for _ in 0..cfg.n_ed {
            let trajectory = simulate_episode(task, &greedy, rng, &mut counter)?;
            observed.record_trajectory(&trajectory);
        }
        state.counters.phase3.merge(&counter);
        let mut found_new = false;
        for s in 0..s_n {
            for a in 0..a_n {
                if observed.count(s, a) < cfg.n_ed_thresh || state.exits.is_exit(s, a) {
                    continue;
                }
                let estimated = observed.estimated_row(s, a, cfg.n_ed_thresh);
                let differs = task_models.iter().try_fold(false, |acc, m| {
                    if acc || !m.is_known(s, a) {
                        return Ok::<bool, MetaTrainError>(acc);
                    }
                    Ok(tv_distance(&estimated, m.row(s, a))? > cfg.beta / 2.0)
                })?;
                if differs && flag_and_learn(family, state, cfg, rng, (s, a))? {
                    found_new = true;
                }
            }
        }
        if found_new {
            state.tasks_since_exit = 0;
        } else {
            state.tasks_since_exit += 1;
        }
        t = (t + 1) % t_n;
    }
    Ok(state.exits.clone())
}
