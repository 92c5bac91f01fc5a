//! Brute-force oracles for the imagined backup, used to cross-check it on
//! small instances.
//!
//! Two independent mechanisms are provided. [`best_over_policies`] enumerates
//! every step-indexed deterministic policy and, for each, picks the best
//! model per visited slot (valid because a slot's model choice never affects
//! later values under a fixed policy). [`enumerate_imaginable_values`]
//! literally enumerates model-index assignments, materializes each as a
//! step-indexed MDP, and solves it exactly.

use mdp_core::{value_iteration, DynamicsTable, TabularMDP};

use crate::error::MetaTrainError;
use crate::exits::ExitTable;

fn check_dims(
    reference: &DynamicsTable,
    task_models: &[DynamicsTable],
    rewards: &[f64],
    exits: &ExitTable,
) -> Result<(usize, usize), MetaTrainError> {
    let (s_n, a_n) = (reference.num_states(), reference.num_actions());
    let ok = task_models.iter().all(|m| m.num_states() == s_n && m.num_actions() == a_n)
        && exits.num_states() == s_n
        && exits.num_actions() == a_n
        && rewards.len() == s_n * a_n;
    if ok {
        Ok((s_n, a_n))
    } else {
        Err(MetaTrainError::BadInput("oracle inputs must share dimensions".to_string()))
    }
}

fn expected_value(row: &[f64], next: &[f64]) -> f64 {
    row.iter().zip(next).map(|(p, v)| p * v).sum()
}

/// Best imagined value over every deterministic step-indexed policy.
///
/// For each of the `A^(S·H)` policies, the policy's value is computed with
/// the best model per slot: flagged pairs use the reference row alone, other
/// pairs take the best continuation over the reference and all task models.
///
/// # Errors
/// Rejects mismatched dimensions and policy spaces larger than `cap`.
pub fn best_over_policies(
    reference: &DynamicsTable,
    task_models: &[DynamicsTable],
    rewards: &[f64],
    horizon: usize,
    exits: &ExitTable,
    start: usize,
    cap: u128,
) -> Result<f64, MetaTrainError> {
    let (s_n, a_n) = check_dims(reference, task_models, rewards, exits)?;
    let slots = horizon * s_n;
    let mut combinations: u128 = 1;
    for _ in 0..slots {
        combinations = combinations.saturating_mul(a_n as u128);
        if combinations > cap {
            return Err(MetaTrainError::EnumerationTooLarge { combinations, cap });
        }
    }
    let mut choice = vec![0usize; slots];
    let mut best_root = f64::NEG_INFINITY;
    loop {
        let mut v_next = vec![0.0; s_n];
        for h in (0..horizon).rev() {
            let mut v_here = vec![0.0; s_n];
            for s in 0..s_n {
                let a = choice[h * s_n + s];
                let future = if exits.is_exit(s, a) {
                    expected_value(reference.row(s, a), &v_next)
                } else {
                    let mut best = expected_value(reference.row(s, a), &v_next);
                    for model in task_models {
                        best = best.max(expected_value(model.row(s, a), &v_next));
                    }
                    best
                };
                v_here[s] = rewards[s * a_n + a] + future;
            }
            v_next = v_here;
        }
        if v_next[start] > best_root {
            best_root = v_next[start];
        }
        // Advance the policy odometer.
        let mut pos = 0;
        loop {
            if pos == slots {
                return Ok(best_root);
            }
            choice[pos] += 1;
            if choice[pos] < a_n {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact optimal value of every materialized model-index assignment.
///
/// Free slots range over index 0 (the reference) plus every task with a
/// populated row; flagged slots are pinned to the reference. A chosen row
/// that is all-zero becomes a jump to an absorbing zero-reward sink, matching
/// the backup's "unknown rows contribute nothing" reading. Returns one exact
/// optimal value per assignment.
///
/// # Errors
/// Rejects mismatched dimensions and assignment counts larger than `cap`.
pub fn enumerate_imaginable_values(
    reference: &DynamicsTable,
    task_models: &[DynamicsTable],
    rewards: &[f64],
    horizon: usize,
    exits: &ExitTable,
    start: usize,
    cap: u128,
) -> Result<Vec<f64>, MetaTrainError> {
    let (s_n, a_n) = check_dims(reference, task_models, rewards, exits)?;
    // Allowed model indices per slot, flattened over (h, s, a).
    let mut allowed: Vec<Vec<usize>> = Vec::with_capacity(horizon * s_n * a_n);
    let mut combinations: u128 = 1;
    for _h in 0..horizon {
        for s in 0..s_n {
            for a in 0..a_n {
                let mut options = vec![0usize];
                if !exits.is_exit(s, a) {
                    for (t, model) in task_models.iter().enumerate() {
                        if model.is_known(s, a) {
                            options.push(t + 1);
                        }
                    }
                }
                combinations = combinations.saturating_mul(options.len() as u128);
                if combinations > cap {
                    return Err(MetaTrainError::EnumerationTooLarge { combinations, cap });
                }
                allowed.push(options);
            }
        }
    }

    let sink = s_n;
    let mut ext_rewards = vec![0.0; (s_n + 1) * a_n];
    for s in 0..s_n {
        for a in 0..a_n {
            ext_rewards[s * a_n + a] = rewards[s * a_n + a];
        }
    }
    let row_of = |slot: usize, index: usize| -> &[f64] {
        let s = (slot / a_n) % s_n;
        let a = slot % a_n;
        if index == 0 {
            reference.row(s, a)
        } else {
            task_models[index - 1].row(s, a)
        }
    };

    let slots = allowed.len();
    let mut pick = vec![0usize; slots];
    let mut values = Vec::new();
    loop {
        let mut per_step = vec![0.0; horizon * (s_n + 1) * a_n * (s_n + 1)];
        for (slot, options) in allowed.iter().enumerate() {
            let h = slot / (s_n * a_n);
            let s = (slot / a_n) % s_n;
            let a = slot % a_n;
            let row = row_of(slot, options[pick[slot]]);
            let base = ((h * (s_n + 1) + s) * a_n + a) * (s_n + 1);
            if row.iter().all(|&p| p == 0.0) {
                per_step[base + sink] = 1.0;
            } else {
                per_step[base..base + s_n].copy_from_slice(row);
            }
        }
        for h in 0..horizon {
            for a in 0..a_n {
                let base = ((h * (s_n + 1) + sink) * a_n + a) * (s_n + 1);
                per_step[base + sink] = 1.0;
            }
        }
        let mdp =
            TabularMDP::new_per_step(s_n + 1, a_n, horizon, start, ext_rewards.clone(), per_step)?;
        let (vt, _) = value_iteration(&mdp, None)?;
        values.push(vt.root_value(start));

        let mut pos = 0;
        loop {
            if pos == slots {
                return Ok(values);
            }
            pick[pos] += 1;
            if pick[pos] < allowed[pos].len() {
                break;
            }
            pick[pos] = 0;
            pos += 1;
        }
    }
}
