//! A minimal two-route family: a long corridor to the goal plus a gated
//! shortcut that only works in one task.
//!
//! The long route keeps the first task's optimal play away from the door, so
//! the door's dynamics row stays invisible to near-optimal behaviour there;
//! the second task's optimal route goes straight through it. This is the
//! smallest instance where cross-task borrowing detects a pair that pairwise
//! comparison of learned task models cannot.

use mdp_core::TabularMDP;

use crate::error::EnvError;
use crate::family::TaskFamily;
use crate::hierarchy::LatentHierarchy;

/// Start of the corridor.
pub const SHORTCUT_START: usize = 0;
/// Goal cell; absorbing with reward one per step for both tasks.
pub const SHORTCUT_GOAL: usize = 4;
/// The gated pair: veering at the door. Closed in task 0, open in task 1.
pub const SHORTCUT_DOOR: (usize, usize) = (5, 1);
/// Episode length.
pub const SHORTCUT_HORIZON: usize = 7;

/// Builds the two-task shortcut family.
///
/// States: `0` start, `1..=3` the long corridor, `4` the goal, `5` the door
/// cell. Action `0` marches along (at the door it retreats to the start);
/// action `1` veers (from the start it enters the door cell, at the door it
/// is the gated exit). Task 0 bounces at the gate; task 1 passes through.
/// Exact optimal values: 3 for the long route, 5 through the shortcut.
///
/// # Errors
/// Construction is fixed; errors only surface if the internal tables are
/// edited into an inconsistent state.
pub fn make_shortcut_family() -> Result<TaskFamily, EnvError> {
    let (s_n, a_n) = (6, 2);
    let mut rewards = vec![0.0; s_n * a_n];
    rewards[SHORTCUT_GOAL * a_n] = 1.0;
    rewards[SHORTCUT_GOAL * a_n + 1] = 1.0;
    let delta = |to: usize| {
        let mut row = vec![0.0; s_n];
        row[to] = 1.0;
        row
    };
    let mut rows = Vec::with_capacity(s_n * a_n * s_n);
    for (march, veer) in [(1, 5), (2, 2), (3, 3), (4, 4), (4, 4), (0, 5)] {
        rows.extend_from_slice(&delta(march));
        rows.extend_from_slice(&delta(veer));
    }
    let closed = TabularMDP::new(s_n, a_n, SHORTCUT_HORIZON, SHORTCUT_START, rewards.clone(), rows.clone())?;
    let mut open = closed.clone();
    open.set_row(SHORTCUT_DOOR.0, SHORTCUT_DOOR.1, &delta(SHORTCUT_GOAL))?;
    let hierarchy = LatentHierarchy::new(
        s_n,
        a_n,
        vec![(0..s_n).collect()],
        vec![vec![SHORTCUT_GOAL, SHORTCUT_DOOR.0]],
        vec![vec![SHORTCUT_DOOR]],
    )?;
    TaskFamily::new(vec![closed, open], hierarchy, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::{validate_family, ValidationParams};
    use mdp_core::value_iteration;

    #[test]
    fn shortcut_family_is_hierarchy_clean() {
        let family = make_shortcut_family().unwrap();
        let report = validate_family(&family, &ValidationParams::default()).unwrap();
        assert!(report.is_clean(), "violations: {:?}", report.violations);
        assert_eq!(report.beta_measured, 1.0, "the gate row flips a full unit of mass");
    }

    #[test]
    fn optimal_values_are_three_and_five() {
        let family = make_shortcut_family().unwrap();
        let (closed, _) = value_iteration(family.task(0), None).unwrap();
        let (open, _) = value_iteration(family.task(1), None).unwrap();
        assert_eq!(closed.root_value(SHORTCUT_START), 3.0, "long route arrives with three steps left");
        assert_eq!(open.root_value(SHORTCUT_START), 5.0, "shortcut arrives with five steps left");
    }

    #[test]
    fn long_route_optimal_play_never_touches_the_door() {
        let family = make_shortcut_family().unwrap();
        let (_, policy) = value_iteration(family.task(0), None).unwrap();
        let p = mdp_core::pair_visit_probability(
            family.task(0),
            &mdp_core::Policy::Deterministic(policy),
            SHORTCUT_DOOR.0,
            SHORTCUT_DOOR.1,
        )
        .unwrap();
        assert_eq!(p, 0.0, "the exact optimal policy of the closed task avoids the door");
    }
}
