//! A depth-`W` binary-tree room feeding a two-action gate, in two variants:
//! the full family (gate action decides between success/failure terminals,
//! varying across tasks) and a reduced single-task family that stops at the
//! gate.
//!
//! Layout: the root transitions to a chain of binary strings of lengths
//! `0..W−1` (either action at the root reaches the empty string; interior
//! nodes append the action bit). Leaves (length `W−1`) reach the gate with
//! probability `1/2`, bumped to `1/2 + ε` for the one rewarded leaf-action
//! pair, and fall into a trap otherwise, so the gate is reached at timestep
//! `W + 1` exactly.

use mdp_core::TabularMDP;

use crate::error::EnvError;
use crate::family::TaskFamily;
use crate::hierarchy::LatentHierarchy;

/// Parameters of one tree-room task.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTreeSpec {
    /// Tree depth `W ≥ 2`; leaves are bit strings of length `W − 1`.
    pub depth: usize,
    /// The rewarded leaf, as a bit string of length `W − 1`.
    pub target_leaf: Vec<u8>,
    /// The rewarded action at the target leaf.
    pub target_action: usize,
    /// Which gate action leads to the success terminal (full variant only).
    pub gate_exit: usize,
    /// Success-probability bonus `ε ∈ (0, 1/2]` at the rewarded pair.
    pub bonus: f64,
    /// Horizon `H ≥ 3W`.
    pub horizon: usize,
}

/// Which construction to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeVariant {
    /// Gate action `gate_exit` reaches an absorbing success terminal paying 1
    /// per step; the other action reaches a zero-reward failure terminal.
    Full,
    /// Terminals dropped; the gate itself absorbs and pays 1 per step.
    Reduced,
}

impl BinaryTreeSpec {
    fn check(&self) -> Result<(), EnvError> {
        if self.depth < 2 {
            return Err(EnvError::BadParameter(format!("tree depth must be at least 2, got {}", self.depth)));
        }
        if self.horizon < 3 * self.depth {
            return Err(EnvError::BadParameter(format!(
                "horizon {} must be at least three times the depth {}",
                self.horizon, self.depth
            )));
        }
        if self.target_leaf.len() != self.depth - 1 {
            return Err(EnvError::BadParameter(format!(
                "target leaf has {} bits but depth {} requires {}",
                self.target_leaf.len(),
                self.depth,
                self.depth - 1
            )));
        }
        if self.target_leaf.iter().any(|&b| b > 1) {
            return Err(EnvError::BadParameter("target leaf must be a bit string".to_string()));
        }
        if self.target_action > 1 || self.gate_exit > 1 {
            return Err(EnvError::BadParameter("actions are binary".to_string()));
        }
        if !(self.bonus > 0.0 && self.bonus <= 0.5) {
            return Err(EnvError::BadParameter(format!("bonus must lie in (0, 1/2], got {}", self.bonus)));
        }
        Ok(())
    }
}

/// State layout shared by both variants.
#[derive(Debug, Clone)]
pub struct TreeLayout {
    depth: usize,
}

impl TreeLayout {
    pub fn root(&self) -> usize {
        0
    }

    /// Index of the node for a bit string of length `0..depth−1`.
    pub fn node(&self, bits: &[u8]) -> usize {
        let level_base = (1usize << bits.len()) - 1;
        let value = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        1 + level_base + value
    }

    pub fn gate(&self) -> usize {
        1 << self.depth
    }

    pub fn trap(&self) -> usize {
        (1 << self.depth) + 1
    }

    /// Success terminal (full variant only).
    pub fn success(&self) -> usize {
        (1 << self.depth) + 2
    }

    /// Failure terminal (full variant only).
    pub fn failure(&self) -> usize {
        (1 << self.depth) + 3
    }

    pub fn num_states(&self, variant: TreeVariant) -> usize {
        match variant {
            TreeVariant::Full => (1 << self.depth) + 4,
            TreeVariant::Reduced => (1 << self.depth) + 2,
        }
    }
}

/// Builds one task of the tree family together with its hierarchy.
///
/// # Errors
/// Rejects invalid specs (see [`BinaryTreeSpec`] field requirements).
pub fn make_binary_tree_mdp(
    spec: &BinaryTreeSpec,
    variant: TreeVariant,
) -> Result<(TabularMDP, LatentHierarchy), EnvError> {
    spec.check()?;
    let layout = TreeLayout { depth: spec.depth };
    let n = layout.num_states(variant);
    let a_n = 2;
    let mut rows = vec![0.0; n * a_n * n];
    let mut set = |s: usize, a: usize, s_next: usize, p: f64| {
        rows[(s * a_n + a) * n + s_next] = p;
    };

    for a in 0..a_n {
        set(layout.root(), a, layout.node(&[]), 1.0);
    }
    let mut stack: Vec<Vec<u8>> = vec![vec![]];
    while let Some(bits) = stack.pop() {
        let state = layout.node(&bits);
        if bits.len() + 1 < spec.depth {
            for a in 0..a_n {
                let mut child = bits.clone();
                child.push(a as u8);
                set(state, a, layout.node(&child), 1.0);
                stack.push(child);
            }
        } else {
            // Leaf: Bernoulli branch between the gate and the trap.
            for a in 0..a_n {
                let p = if bits == spec.target_leaf && a == spec.target_action {
                    0.5 + spec.bonus
                } else {
                    0.5
                };
                set(state, a, layout.gate(), p);
                set(state, a, layout.trap(), 1.0 - p);
            }
        }
    }
    for a in 0..a_n {
        set(layout.trap(), a, layout.trap(), 1.0);
    }

    let mut rewards = vec![0.0; n * a_n];
    let (hierarchy, start) = match variant {
        TreeVariant::Full => {
            for a in 0..a_n {
                let dest = if a == spec.gate_exit { layout.success() } else { layout.failure() };
                set(layout.gate(), a, dest, 1.0);
                set(layout.success(), a, layout.success(), 1.0);
                set(layout.failure(), a, layout.failure(), 1.0);
                rewards[layout.success() * a_n + a] = 1.0;
            }
            rewards[layout.gate() * a_n + spec.target_action] = 1.0;
            let room: Vec<usize> = (0..=layout.trap()).collect();
            let hierarchy = LatentHierarchy::new(
                n,
                a_n,
                vec![room, vec![layout.success()], vec![layout.failure()]],
                vec![vec![layout.root()], vec![layout.success()], vec![layout.failure()]],
                vec![vec![(layout.gate(), 0), (layout.gate(), 1)], vec![], vec![]],
            )?;
            (hierarchy, layout.root())
        }
        TreeVariant::Reduced => {
            for a in 0..a_n {
                set(layout.gate(), a, layout.gate(), 1.0);
                rewards[layout.gate() * a_n + a] = 1.0;
            }
            let all: Vec<usize> = (0..n).collect();
            let hierarchy =
                LatentHierarchy::new(n, a_n, vec![all], vec![vec![layout.root()]], vec![vec![]])?;
            (hierarchy, layout.root())
        }
    };
    let mdp = TabularMDP::new(n, a_n, spec.horizon, start, rewards, rows)?;
    Ok((mdp, hierarchy))
}

/// The two-task family that differs only in which gate action succeeds.
///
/// # Errors
/// Propagates spec validation failures.
pub fn make_binary_tree_family(spec: &BinaryTreeSpec) -> Result<TaskFamily, EnvError> {
    let mut spec0 = spec.clone();
    spec0.gate_exit = 0;
    let mut spec1 = spec.clone();
    spec1.gate_exit = 1;
    let (t0, hierarchy) = make_binary_tree_mdp(&spec0, TreeVariant::Full)?;
    let (t1, _) = make_binary_tree_mdp(&spec1, TreeVariant::Full)?;
    // The gate rows are swapped point masses across the two tasks, so both
    // exits vary at total variation distance exactly 1.
    TaskFamily::new(vec![t0, t1], hierarchy, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mdp_core::{occupancy, value_iteration, Policy};

    fn spec(depth: usize, horizon: usize) -> BinaryTreeSpec {
        BinaryTreeSpec {
            depth,
            target_leaf: vec![0; depth - 1],
            target_action: 1,
            gate_exit: 0,
            bonus: 0.1,
            horizon,
        }
    }

    #[test]
    fn state_counts_match_both_variants() {
        for depth in [2, 3, 4] {
            let s = spec(depth, 3 * depth + 2);
            let (full, _) = make_binary_tree_mdp(&s, TreeVariant::Full).unwrap();
            assert_eq!(full.num_states(), (1 << depth) + 4);
            let (reduced, _) = make_binary_tree_mdp(&s, TreeVariant::Reduced).unwrap();
            assert_eq!(reduced.num_states(), (1 << depth) + 2);
        }
    }

    #[test]
    fn leaf_rows_follow_the_bernoulli_rule() {
        let s = spec(3, 12);
        let (mdp, _) = make_binary_tree_mdp(&s, TreeVariant::Full).unwrap();
        let layout = TreeLayout { depth: 3 };
        let target = layout.node(&s.target_leaf);
        let other = layout.node(&[1, 0]);
        assert_eq!(mdp.stationary_row(target, 1)[layout.gate()], 0.6, "rewarded pair");
        assert_eq!(mdp.stationary_row(target, 0)[layout.gate()], 0.5, "wrong action at the target leaf");
        assert_eq!(mdp.stationary_row(other, 1)[layout.gate()], 0.5, "other leaf");
        assert_eq!(mdp.stationary_row(other, 1)[layout.trap()], 0.5);
    }

    #[test]
    fn reduced_variant_value_is_gate_probability_times_remaining_steps() {
        // Depth 2, horizon 6, bonus 0.1: the best policy reaches the gate at
        // timestep 3 with probability 0.6 and farms the remaining 3 steps.
        let s = spec(2, 6);
        let (mdp, _) = make_binary_tree_mdp(&s, TreeVariant::Reduced).unwrap();
        let (vt, _) = value_iteration(&mdp, None).unwrap();
        assert!((vt.root_value(mdp.start_state()) - 1.8).abs() < 1e-9, "got {}", vt.root_value(mdp.start_state()));
        // The general form: (H − W − 1) · (1/2 + ε).
        let s = spec(3, 11);
        let (mdp, _) = make_binary_tree_mdp(&s, TreeVariant::Reduced).unwrap();
        let (vt, _) = value_iteration(&mdp, None).unwrap();
        let expected = (11 - 3 - 1) as f64 * 0.6;
        assert!((vt.root_value(mdp.start_state()) - expected).abs() < 1e-9);
    }

    #[test]
    fn gate_is_first_reachable_at_timestep_depth_plus_one() {
        let s = spec(3, 12);
        let (mdp, _) = make_binary_tree_mdp(&s, TreeVariant::Full).unwrap();
        let layout = TreeLayout { depth: 3 };
        let (_, pol) = value_iteration(&mdp, None).unwrap();
        let occ = occupancy(&mdp, &Policy::Deterministic(pol)).unwrap();
        for h in 0..=s.depth {
            assert_eq!(occ.state_prob(h, layout.gate()), 0.0, "gate unreachable at step {h}");
        }
        assert!(occ.state_prob(s.depth + 1, layout.gate()) > 0.0, "gate reached at step depth+1");
    }

    #[test]
    fn family_varies_exactly_at_the_gate() {
        let fam = make_binary_tree_family(&spec(3, 12)).unwrap();
        let layout = TreeLayout { depth: 3 };
        assert_eq!(fam.hierarchy().all_exits(), vec![(layout.gate(), 0), (layout.gate(), 1)]);
        for s in 0..fam.num_states() {
            for a in 0..2 {
                let same = fam.task(0).stationary_row(s, a) == fam.task(1).stationary_row(s, a);
                assert_eq!(same, !fam.hierarchy().is_exit(s, a), "row ({s},{a})");
            }
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = spec(3, 12);
        s.target_leaf = vec![0];
        assert!(make_binary_tree_mdp(&s, TreeVariant::Full).is_err(), "wrong leaf length");
        let mut s = spec(3, 12);
        s.horizon = 8;
        assert!(make_binary_tree_mdp(&s, TreeVariant::Full).is_err(), "horizon below three times depth");
        let mut s = spec(3, 12);
        s.bonus = 0.0;
        assert!(make_binary_tree_mdp(&s, TreeVariant::Full).is_err(), "zero bonus");
        assert!(make_binary_tree_mdp(&spec(1, 12), TreeVariant::Full).is_err(), "depth below 2");
    }
}
