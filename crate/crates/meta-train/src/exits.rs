//! The shared table of detected exits and their per-task dynamics rows.

use mdp_core::DynamicsTable;

use crate::error::MetaTrainError;

/// Flags over state-action pairs plus, for each flagged pair, the per-task
/// dynamics rows recovered by the exit-learning subroutine.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitTable {
    num_states: usize,
    num_actions: usize,
    num_tasks: usize,
    is_exit: Vec<bool>,
    rows: Vec<DynamicsTable>,
}

impl ExitTable {
    /// An empty table: nothing flagged, all rows unknown.
    pub fn new(num_tasks: usize, num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            num_tasks,
            is_exit: vec![false; num_states * num_actions],
            rows: vec![DynamicsTable::unknown(num_states, num_actions); num_tasks],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    pub fn is_exit(&self, s: usize, a: usize) -> bool {
        self.is_exit[s * self.num_actions + a]
    }

    /// Flags a pair; returns `true` if it was not flagged before.
    pub fn flag(&mut self, s: usize, a: usize) -> bool {
        let slot = &mut self.is_exit[s * self.num_actions + a];
        let fresh = !*slot;
        *slot = true;
        fresh
    }

    /// Stores task `t`'s learned dynamics row for a flagged pair.
    ///
    /// # Errors
    /// The pair must already be flagged and the row must have one probability
    /// per state.
    pub fn set_task_row(&mut self, t: usize, s: usize, a: usize, row: &[f64]) -> Result<(), MetaTrainError> {
        if !self.is_exit(s, a) {
            return Err(MetaTrainError::BadInput(format!("pair ({s}, {a}) is not flagged")));
        }
        if row.len() != self.num_states {
            return Err(MetaTrainError::BadInput(format!(
                "row for ({s}, {a}) has {} entries, need {}",
                row.len(),
                self.num_states
            )));
        }
        self.rows[t].set_row(s, a, row);
        Ok(())
    }

    /// Task `t`'s learned row for a pair (all-zero when not yet learned).
    pub fn task_row(&self, t: usize, s: usize, a: usize) -> &[f64] {
        self.rows[t].row(s, a)
    }

    /// All flagged pairs in row-major order.
    pub fn flagged_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                if self.is_exit(s, a) {
                    out.push((s, a));
                }
            }
        }
        out
    }

    /// Number of flagged pairs.
    pub fn count(&self) -> usize {
        self.is_exit.iter().filter(|&&b| b).count()
    }

    /// True when every flagged pair has a nonzero learned row in every task.
    pub fn rows_complete(&self) -> bool {
        self.flagged_pairs().iter().all(|&(s, a)| (0..self.num_tasks).all(|t| self.rows[t].is_known(s, a)))
    }

    /// Copy of `base` with every flagged pair's row replaced by task `t`'s
    /// learned row (flagged pairs without a learned row become unknown).
    pub fn overlay_onto(&self, t: usize, base: &DynamicsTable) -> DynamicsTable {
        let mut out = base.clone();
        for (s, a) in self.flagged_pairs() {
            out.set_row(s, a, self.rows[t].row(s, a));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flagging_is_idempotent_and_counted() {
        let mut table = ExitTable::new(2, 3, 2);
        assert!(table.flag(1, 0), "first flag is new");
        assert!(!table.flag(1, 0), "second flag is not");
        assert_eq!(table.count(), 1);
        assert_eq!(table.flagged_pairs(), vec![(1, 0)]);
        assert!(!table.is_exit(0, 0));
    }

    #[test]
    fn rows_complete_requires_every_task() {
        let mut table = ExitTable::new(2, 3, 2);
        table.flag(2, 1);
        assert!(!table.rows_complete());
        table.set_task_row(0, 2, 1, &[1.0, 0.0, 0.0]).unwrap();
        assert!(!table.rows_complete(), "task 1 still missing");
        table.set_task_row(1, 2, 1, &[0.0, 1.0, 0.0]).unwrap();
        assert!(table.rows_complete());
        assert_eq!(table.task_row(1, 2, 1), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn set_task_row_rejects_unflagged_and_misshapen() {
        let mut table = ExitTable::new(1, 3, 2);
        assert!(table.set_task_row(0, 0, 0, &[1.0, 0.0, 0.0]).is_err(), "unflagged pair");
        table.flag(0, 0);
        assert!(table.set_task_row(0, 0, 0, &[1.0, 0.0]).is_err(), "wrong row length");
    }

    #[test]
    fn overlay_replaces_only_flagged_rows() {
        let mut base = DynamicsTable::unknown(3, 2);
        base.set_row(0, 0, &[0.5, 0.5, 0.0]);
        base.set_row(2, 1, &[0.0, 0.0, 1.0]);
        let mut table = ExitTable::new(1, 3, 2);
        table.flag(2, 1);
        table.set_task_row(0, 2, 1, &[1.0, 0.0, 0.0]).unwrap();
        let merged = table.overlay_onto(0, &base);
        assert_eq!(merged.row(0, 0), &[0.5, 0.5, 0.0], "unflagged row untouched");
        assert_eq!(merged.row(2, 1), &[1.0, 0.0, 0.0], "flagged row replaced");
    }
}
