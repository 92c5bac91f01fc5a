//! End-to-end wiring of the three phases around a shared [`MetaTrainState`],
//! so callers can run the whole discovery in one call or phase by phase.

use env_suite::TaskFamily;
use rand_chacha::ChaCha8Rng;

use crate::config::MetaTrainConfig;
use crate::error::MetaTrainError;
use crate::exits::ExitTable;
use crate::phase1::phase1_task_learning;
use crate::phase2::{merge_reference_models, phase2_reward_free};
use crate::phase3::phase3_detect_exits;
use crate::state::MetaTrainState;

/// Final state plus the detected exit set.
#[derive(Debug, Clone)]
pub struct DiscoveryOutcome {
    pub state: MetaTrainState,
    pub exits: ExitTable,
}

fn check_designated(family: &TaskFamily, cfg: &MetaTrainConfig) -> Result<(), MetaTrainError> {
    for &d in &cfg.designated_tasks {
        if d > family.num_tasks() {
            return Err(MetaTrainError::BadConfig(format!(
                "designated task {d} exceeds the family's {} tasks",
                family.num_tasks()
            )));
        }
    }
    Ok(())
}

/// Runs the task-learning phase and stores its models, value estimates, and
/// step counter into `state`.
///
/// # Errors
/// The state's dimensions must match the family's.
pub fn run_phase1(
    family: &TaskFamily,
    cfg: &MetaTrainConfig,
    state: &mut MetaTrainState,
    rng: &mut ChaCha8Rng,
) -> Result<(), MetaTrainError> {
    check_dims(family, state)?;
    let (tasks, counter) = phase1_task_learning(family, cfg, rng)?;
    for (t, task) in tasks.into_iter().enumerate() {
        state.task_models[t] = task.model;
        state.value_estimates[t] = task.value_estimate;
    }
    state.counters.phase1.merge(&counter);
    Ok(())
}

/// Runs the reward-free phase on every designated task and stores the merged
/// reference model and step counter into `state`.
///
/// # Errors
/// Designated task numbers must exist in the family and the state's
/// dimensions must match.
pub fn run_phase2(
    family: &TaskFamily,
    cfg: &MetaTrainConfig,
    state: &mut MetaTrainState,
    rng: &mut ChaCha8Rng,
) -> Result<(), MetaTrainError> {
    check_dims(family, state)?;
    check_designated(family, cfg)?;
    let mut references = Vec::with_capacity(cfg.designated_tasks.len());
    for &d in &cfg.designated_tasks {
        let out = phase2_reward_free(family.task(d - 1), cfg, rng)?;
        state.counters.phase2.merge(&out.counter);
        references.push(out.reference);
    }
    state.reference = merge_reference_models(&references)?;
    Ok(())
}

fn check_dims(family: &TaskFamily, state: &MetaTrainState) -> Result<(), MetaTrainError> {
    if state.num_tasks() != family.num_tasks()
        || state.num_states() != family.num_states()
        || state.num_actions() != family.num_actions()
        || state.horizon() != family.horizon()
    {
        return Err(MetaTrainError::BadInput("state dimensions do not match the family".to_string()));
    }
    Ok(())
}

/// Runs all three phases in order and returns the detected exits together
/// with the final state (models, counters, and learned exit rows).
///
/// # Errors
/// Propagates configuration and learner failures from any phase.
pub fn run_exit_discovery(
    family: &TaskFamily,
    cfg: &MetaTrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<DiscoveryOutcome, MetaTrainError> {
    cfg.validate()?;
    let mut state = MetaTrainState::new(
        family.num_tasks(),
        family.num_states(),
        family.num_actions(),
        family.horizon(),
    );
    run_phase1(family, cfg, &mut state, rng)?;
    run_phase2(family, cfg, &mut state, rng)?;
    let exits = phase3_detect_exits(family, &mut state, cfg, rng)?;
    Ok(DiscoveryOutcome { state, exits })
}
