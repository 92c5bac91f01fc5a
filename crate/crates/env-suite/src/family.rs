//! A set of tasks sharing a state/action space and a cluster hierarchy.

use mdp_core::TabularMDP;

use crate::error::EnvError;
use crate::hierarchy::LatentHierarchy;

/// Tasks over one shared `(S, A, H, s₀)` signature plus the ground-truth
/// hierarchy they were generated with and their claimed separation `β`.
///
/// Construction checks only shape compatibility; the structural conditions
/// (identical non-exit rows, exit variation, support constraints) are the
/// validator's job, so deliberately broken families can still be built and
/// fed to it.
#[derive(Debug, Clone)]
pub struct TaskFamily {
    tasks: Vec<TabularMDP>,
    hierarchy: LatentHierarchy,
    separation: f64,
}

impl TaskFamily {
    /// # Errors
    /// Rejects empty task lists, signature mismatches between tasks, a
    /// hierarchy over the wrong space, and `β ∉ (0, 1]`.
    pub fn new(tasks: Vec<TabularMDP>, hierarchy: LatentHierarchy, separation: f64) -> Result<Self, EnvError> {
        let first = tasks.first().ok_or_else(|| EnvError::BadFamily("no tasks".to_string()))?;
        let sig = (first.num_states(), first.num_actions(), first.horizon(), first.start_state());
        for (t, task) in tasks.iter().enumerate() {
            let got = (task.num_states(), task.num_actions(), task.horizon(), task.start_state());
            if got != sig {
                return Err(EnvError::BadFamily(format!("task {t} signature {got:?} differs from task 0 {sig:?}")));
            }
            if task.is_per_step() {
                return Err(EnvError::BadFamily(format!("task {t} has per-step dynamics; tasks must be stationary")));
            }
        }
        if hierarchy.num_states() != sig.0 || hierarchy.num_actions() != sig.1 {
            return Err(EnvError::BadFamily(format!(
                "hierarchy is over {}x{} but tasks are over {}x{}",
                hierarchy.num_states(),
                hierarchy.num_actions(),
                sig.0,
                sig.1
            )));
        }
        if !(separation > 0.0 && separation <= 1.0) {
            return Err(EnvError::BadFamily(format!("separation must lie in (0, 1], got {separation}")));
        }
        Ok(Self { tasks, hierarchy, separation })
    }

    pub fn tasks(&self) -> &[TabularMDP] {
        &self.tasks
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn task(&self, t: usize) -> &TabularMDP {
        &self.tasks[t]
    }

    pub fn hierarchy(&self) -> &LatentHierarchy {
        &self.hierarchy
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn num_states(&self) -> usize {
        self.tasks[0].num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.tasks[0].num_actions()
    }

    pub fn horizon(&self) -> usize {
        self.tasks[0].horizon()
    }

    pub fn start_state(&self) -> usize {
        self.tasks[0].start_state()
    }
}

/// A task restricted to one cluster: cluster states keep their in-cluster
/// dynamics, every exit pair of the cluster leads to an appended zero-reward
/// sink, and the start state is a chosen entrance.
#[derive(Debug, Clone)]
pub struct ClusterRestriction {
    /// The restricted MDP over `cluster ∪ {sink}` with all rewards zero.
    pub mdp: TabularMDP,
    /// `local_of[s]` maps an original state to its local index (cluster
    /// members only; other entries are `usize::MAX`).
    pub local_of: Vec<usize>,
    /// `original_of[i]` maps a local index back to the original state (the
    /// sink has no preimage and is excluded).
    pub original_of: Vec<usize>,
    /// Local index of the appended sink.
    pub sink: usize,
}

/// Restricts `task` to cluster `c` of `hierarchy`, starting from `entrance`.
///
/// Exit rows are rerouted to the sink regardless of where they pointed, so
/// the restriction is well-defined even for families that violate the support
/// conditions.
///
/// # Errors
/// Rejects entrances outside the cluster.
pub fn cluster_restriction(
    task: &TabularMDP,
    hierarchy: &LatentHierarchy,
    c: usize,
    entrance: usize,
) -> Result<ClusterRestriction, EnvError> {
    let members = hierarchy.cluster(c);
    if hierarchy.cluster_of(entrance) != c {
        return Err(EnvError::BadFamily(format!("start state {entrance} is not in cluster {c}")));
    }
    let mut local_of = vec![usize::MAX; task.num_states()];
    for (i, &s) in members.iter().enumerate() {
        local_of[s] = i;
    }
    let sink = members.len();
    let n = members.len() + 1;
    let a_n = task.num_actions();
    // Zero rewards keep significance probes exact; callers override rewards
    // when they need an objective.
    let rewards = vec![0.0; n * a_n];
    let mut rows = vec![0.0; n * a_n * n];
    for (i, &s) in members.iter().enumerate() {
        for a in 0..a_n {
            let base = (i * a_n + a) * n;
            if hierarchy.is_exit(s, a) {
                rows[base + sink] = 1.0;
                continue;
            }
            let row = task.stationary_row(s, a);
            let mut leaked = 0.0;
            for (s_next, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                if local_of[s_next] == usize::MAX {
                    leaked += p;
                } else {
                    rows[base + local_of[s_next]] += p;
                }
            }
            // Mass escaping the cluster (a support violation elsewhere
            // reported by the validator) is absorbed by the sink so the
            // restriction stays a valid MDP.
            if leaked > 0.0 {
                rows[base + sink] += leaked;
            }
        }
    }
    for a in 0..a_n {
        let base = (sink * a_n + a) * n;
        rows[base + sink] = 1.0;
    }
    let mdp = TabularMDP::new(n, a_n, task.horizon(), local_of[entrance], rewards, rows)?;
    Ok(ClusterRestriction { mdp, local_of, original_of: members.to_vec(), sink })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cluster_family() -> TaskFamily {
        // States 0,1 in cluster 0; state 2 in cluster 1. Exit (1, 1) lands on
        // the entrance 2 in task 0 and stays home (entrance 1) in task 1.
        let rewards = vec![0.0; 6];
        let rows_a = vec![
            0.0, 1.0, 0.0, /* (0,0) */ 1.0, 0.0, 0.0, /* (0,1) */
            1.0, 0.0, 0.0, /* (1,0) */ 0.0, 0.0, 1.0, /* (1,1) exit */
            0.0, 0.0, 1.0, /* (2,0) */ 0.0, 0.0, 1.0, /* (2,1) */
        ];
        let mut rows_b = rows_a.clone();
        rows_b[3 * 3..4 * 3].copy_from_slice(&[0.0, 1.0, 0.0]);
        let t0 = TabularMDP::new(3, 2, 4, 0, rewards.clone(), rows_a).unwrap();
        let t1 = TabularMDP::new(3, 2, 4, 0, rewards, rows_b).unwrap();
        let h = LatentHierarchy::new(
            3,
            2,
            vec![vec![0, 1], vec![2]],
            vec![vec![0, 1], vec![2]],
            vec![vec![(1, 1)], vec![]],
        )
        .unwrap();
        TaskFamily::new(vec![t0, t1], h, 1.0).unwrap()
    }

    #[test]
    fn family_exposes_shared_signature() {
        let fam = two_cluster_family();
        assert_eq!(fam.num_tasks(), 2);
        assert_eq!((fam.num_states(), fam.num_actions(), fam.horizon(), fam.start_state()), (3, 2, 4, 0));
    }

    #[test]
    fn mismatched_horizons_are_rejected() {
        let fam = two_cluster_family();
        let mut tasks = fam.tasks().to_vec();
        tasks[1] = tasks[1].with_horizon(5).unwrap();
        let err = TaskFamily::new(tasks, fam.hierarchy().clone(), 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn restriction_reroutes_exits_to_sink() {
        let fam = two_cluster_family();
        let restr = cluster_restriction(fam.task(0), fam.hierarchy(), 0, 1).unwrap();
        assert_eq!(restr.mdp.num_states(), 3, "two members plus sink");
        assert_eq!(restr.mdp.start_state(), restr.local_of[1]);
        let exit_row = restr.mdp.stationary_row(restr.local_of[1], 1);
        assert_eq!(exit_row[restr.sink], 1.0, "exit must lead to the sink");
        let stay_row = restr.mdp.stationary_row(restr.local_of[0], 1);
        assert_eq!(stay_row[restr.local_of[0]], 1.0, "in-cluster rows are preserved");
    }

    #[test]
    fn restriction_rejects_foreign_entrance() {
        let fam = two_cluster_family();
        assert!(cluster_restriction(fam.task(0), fam.hierarchy(), 0, 2).is_err());
    }
}
