//! Backward induction that borrows dynamics across tasks: at every
//! non-flagged pair the backup takes the best continuation over the reference
//! model and every task model, while flagged pairs are pinned to the
//! (pre-substituted) reference rows.

use mdp_core::{DetPolicy, DynamicsTable};

use crate::error::MetaTrainError;
use crate::exits::ExitTable;

/// Which model each backup used: `0` is the reference, `t >= 1` is task `t`
/// (1-based, matching the model slice shifted by one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImaginedIndex {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    idx: Vec<usize>,
}

impl ImaginedIndex {
    pub fn index(&self, h: usize, s: usize, a: usize) -> usize {
        self.idx[(h * self.num_states + s) * self.num_actions + a]
    }

    /// Pairs whose chosen model at some step is neither the reference nor
    /// the stated task — the places where imagination genuinely borrowed.
    pub fn borrowed_pairs(&self, own_task: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let borrowed =
                    (0..self.horizon).any(|h| self.index(h, s, a) != 0 && self.index(h, s, a) != own_task);
                if borrowed {
                    out.push((s, a));
                }
            }
        }
        out
    }
}

/// Value and action-value tables from an imagined backup.
#[derive(Debug, Clone, PartialEq)]
pub struct BoatTables {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    v: Vec<f64>,
    q: Vec<f64>,
}

impl BoatTables {
    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v[h * self.num_states + s]
    }

    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[(h * self.num_states + s) * self.num_actions + a]
    }

    /// Imagined value of the start state.
    pub fn root(&self, start: usize) -> f64 {
        self.v(0, start)
    }

    /// Step-indexed greedy policy; ties break toward the lowest action.
    pub fn greedy_policy(&self) -> DetPolicy {
        let mut actions = Vec::with_capacity(self.horizon * self.num_states);
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                let mut best = 0usize;
                for a in 1..self.num_actions {
                    if self.q(h, s, a) > self.q(h, s, best) {
                        best = a;
                    }
                }
                actions.push(best);
            }
        }
        DetPolicy::new(self.horizon, self.num_states, self.num_actions, actions)
            .expect("greedy tables are built with consistent dimensions")
    }
}

fn expected_value(row: &[f64], next: &[f64]) -> f64 {
    row.iter().zip(next).map(|(p, v)| p * v).sum()
}

/// Backward induction over imagined dynamics.
///
/// At flagged pairs the continuation comes from `reference` alone (the caller
/// substitutes the acting task's learned exit rows there first) and the index
/// records `invoking_task`. Everywhere else the backup takes the best
/// continuation over the reference (index 0) and every task model (index
/// `t >= 1`); an all-zero row contributes zero continuation, so it never
/// beats a populated alternative when values are nonnegative. Ties break
/// toward the lowest index.
///
/// # Errors
/// All tables must share dimensions; `rewards` is row-major over pairs;
/// `invoking_task` is 1-based and must not exceed the number of task models.
pub fn boat_vi(
    reference: &DynamicsTable,
    task_models: &[DynamicsTable],
    rewards: &[f64],
    horizon: usize,
    exits: &ExitTable,
    invoking_task: usize,
) -> Result<(BoatTables, ImaginedIndex), MetaTrainError> {
    let (s_n, a_n) = (reference.num_states(), reference.num_actions());
    for (t, model) in task_models.iter().enumerate() {
        if model.num_states() != s_n || model.num_actions() != a_n {
            return Err(MetaTrainError::BadInput(format!(
                "task model {t} is {}x{}, reference is {s_n}x{a_n}",
                model.num_states(),
                model.num_actions()
            )));
        }
    }
    if exits.num_states() != s_n || exits.num_actions() != a_n {
        return Err(MetaTrainError::BadInput("exit table dimensions differ from the models".to_string()));
    }
    if rewards.len() != s_n * a_n {
        return Err(MetaTrainError::BadInput(format!(
            "rewards have {} entries, need {}",
            rewards.len(),
            s_n * a_n
        )));
    }
    if invoking_task == 0 || invoking_task > task_models.len() {
        return Err(MetaTrainError::BadInput(format!(
            "invoking task {invoking_task} out of range 1..={}",
            task_models.len()
        )));
    }
    if horizon == 0 {
        return Err(MetaTrainError::BadInput("horizon must be positive".to_string()));
    }

    let mut v = vec![0.0; (horizon + 1) * s_n];
    let mut q = vec![0.0; horizon * s_n * a_n];
    let mut idx = vec![0usize; horizon * s_n * a_n];
    for h in (0..horizon).rev() {
        let (head, tail) = v.split_at_mut((h + 1) * s_n);
        let v_next = &tail[..s_n];
        let v_here = &mut head[h * s_n..];
        for s in 0..s_n {
            let mut best_v = f64::NEG_INFINITY;
            for a in 0..a_n {
                let (future, chosen) = if exits.is_exit(s, a) {
                    (expected_value(reference.row(s, a), v_next), invoking_task)
                } else {
                    let mut best = expected_value(reference.row(s, a), v_next);
                    let mut best_t = 0usize;
                    for (t, model) in task_models.iter().enumerate() {
                        let value = expected_value(model.row(s, a), v_next);
                        if value > best {
                            best = value;
                            best_t = t + 1;
                        }
                    }
                    (best, best_t)
                };
                let slot = (h * s_n + s) * a_n + a;
                q[slot] = rewards[s * a_n + a] + future;
                idx[slot] = chosen;
                if q[slot] > best_v {
                    best_v = q[slot];
                }
            }
            v_here[s] = best_v;
        }
    }
    v.truncate(horizon * s_n);
    Ok((
        BoatTables { horizon, num_states: s_n, num_actions: a_n, v, q },
        ImaginedIndex { horizon, num_states: s_n, num_actions: a_n, idx },
    ))
}
