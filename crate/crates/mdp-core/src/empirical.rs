//! Empirical dynamics estimation from trajectories.

use crate::error::MdpError;
use crate::policy::Trajectory;

/// A table of (possibly unknown) transition rows estimated from data.
///
/// An all-zero row means "unknown": the pair was seen fewer times than the
/// estimation threshold. Known rows sum to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTable {
    num_states: usize,
    num_actions: usize,
    rows: Vec<f64>,
}

impl DynamicsTable {
    /// All-unknown table.
    pub fn unknown(num_states: usize, num_actions: usize) -> Self {
        Self { num_states, num_actions, rows: vec![0.0; num_states * num_actions * num_states] }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.num_actions + a) * self.num_states;
        &self.rows[base..base + self.num_states]
    }

    pub fn is_known(&self, s: usize, a: usize) -> bool {
        self.row(s, a).iter().any(|&p| p > 0.0)
    }

    /// Overwrites one row (no validation beyond shape; callers pass either a
    /// probability row or all zeros).
    pub fn set_row(&mut self, s: usize, a: usize, row: &[f64]) {
        assert_eq!(row.len(), self.num_states, "row length");
        let base = (s * self.num_actions + a) * self.num_states;
        self.rows[base..base + self.num_states].copy_from_slice(row);
    }

    /// Flat row storage, laid out as `[(s * A + a) * S + s']`.
    pub fn raw_rows(&self) -> &[f64] {
        &self.rows
    }
}

/// Transition counts and the thresholded empirical estimate built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    num_states: usize,
    num_actions: usize,
    /// `N(s,a,s')`, laid out as `[(s * A + a) * S + s']`.
    counts: Vec<u64>,
    /// `N(s,a)`, laid out as `[s * A + a]`.
    totals: Vec<u64>,
}

impl EmpiricalModel {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        Self {
            num_states,
            num_actions,
            counts: vec![0; num_states * num_actions * num_states],
            totals: vec![0; num_states * num_actions],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Records one observed transition.
    pub fn record(&mut self, s: usize, a: usize, s_next: usize) {
        self.counts[(s * self.num_actions + a) * self.num_states + s_next] += 1;
        self.totals[s * self.num_actions + a] += 1;
    }

    /// Records every step of a trajectory.
    pub fn record_trajectory(&mut self, trajectory: &Trajectory) {
        for step in &trajectory.steps {
            self.record(step.state, step.action, step.next_state);
        }
    }

    /// Adds another model's counts into this one (order-independent, so
    /// parallel batches can be merged in any order).
    pub fn merge(&mut self, other: &EmpiricalModel) {
        assert_eq!(self.num_states, other.num_states, "state count");
        assert_eq!(self.num_actions, other.num_actions, "action count");
        for (dst, src) in self.counts.iter_mut().zip(other.counts.iter()) {
            *dst += src;
        }
        for (dst, src) in self.totals.iter_mut().zip(other.totals.iter()) {
            *dst += src;
        }
    }

    pub fn count(&self, s: usize, a: usize) -> u64 {
        self.totals[s * self.num_actions + a]
    }

    pub fn count_triple(&self, s: usize, a: usize, s_next: usize) -> u64 {
        self.counts[(s * self.num_actions + a) * self.num_states + s_next]
    }

    /// All transition counts, laid out as `[(s * A + a) * S + s']`.
    pub fn raw_counts(&self) -> &[u64] {
        &self.counts
    }

    /// Adds `n` observations of one transition at once.
    pub fn record_n(&mut self, s: usize, a: usize, s_next: usize, n: u64) {
        self.counts[(s * self.num_actions + a) * self.num_states + s_next] += n;
        self.totals[s * self.num_actions + a] += n;
    }

    /// Empirical mean row for `(s, a)`, or all zeros when `N(s,a) < threshold`.
    pub fn estimated_row(&self, s: usize, a: usize, threshold: u64) -> Vec<f64> {
        let n = self.count(s, a);
        let base = (s * self.num_actions + a) * self.num_states;
        if n < threshold.max(1) {
            return vec![0.0; self.num_states];
        }
        self.counts[base..base + self.num_states].iter().map(|&c| c as f64 / n as f64).collect()
    }

    /// Thresholded estimate: rows with `N(s,a) < threshold` become unknown.
    pub fn estimate(&self, threshold: u64) -> DynamicsTable {
        let mut table = DynamicsTable::unknown(self.num_states, self.num_actions);
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                if self.count(s, a) >= threshold.max(1) {
                    table.set_row(s, a, &self.estimated_row(s, a, threshold));
                }
            }
        }
        table
    }
}

/// Builds a thresholded empirical model from trajectories of a single MDP.
pub fn estimate_dynamics(
    num_states: usize,
    num_actions: usize,
    trajectories: &[Trajectory],
    threshold: u64,
) -> (EmpiricalModel, DynamicsTable) {
    let mut model = EmpiricalModel::new(num_states, num_actions);
    for t in trajectories {
        model.record_trajectory(t);
    }
    let table = model.estimate(threshold);
    (model, table)
}

/// Total-variation distance `(1/2) Σ |p - q|` between two probability rows.
///
/// # Errors
/// Rejects all-zero (unknown) input rows and length mismatches.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64, MdpError> {
    if p.len() != q.len() {
        return Err(MdpError::ShapeMismatch { what: "tv rows", expected: p.len(), got: q.len() });
    }
    if p.iter().all(|&x| x == 0.0) || q.iter().all(|&x| x == 0.0) {
        return Err(MdpError::UnknownRow { state: 0, action: 0 });
    }
    Ok(0.5 * p.iter().zip(q.iter()).map(|(&a, &b)| (a - b).abs()).sum::<f64>())
}
