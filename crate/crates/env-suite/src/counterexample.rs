//! Two hand-built MDPs on which committed hierarchical control provably
//! loses to flat planning: a chain whose shortcut attempts have high-variance
//! completion times, and a room whose fastest goal route is not the most
//! reliable one.

use mdp_core::TabularMDP;

use crate::error::EnvError;
use crate::hierarchy::LatentHierarchy;

/// Which construction to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleKind {
    /// Chain `s_0..s_n` with side states `t_0..t_n` and an absorbing
    /// reward state: action 0 at `s_i` moves to `t_i` or `s_{i+1}` with
    /// probability 1/2 each (`s_n` reaches `t_n` surely), action 1 advances
    /// deterministically (`s_n` wraps to `s_0`), every `t_i` leads to the
    /// reward state, and the horizon is `n + 2`.
    HighVarianceChain { chain_len: usize },
    /// Center state with two length-`n/2` corridors and a shortcut state
    /// reaching either corridor end with probability 1/2 in two steps; each
    /// corridor end has one exit pair into its own absorbing reward-1
    /// terminal. Horizon `n` (`n` even, ≥ 4).
    TwoArmRoom { horizon: usize },
}

/// Handle into the chain construction's states.
#[derive(Debug, Clone, Copy)]
pub struct ChainStates {
    pub chain_len: usize,
}

impl ChainStates {
    pub fn s(&self, i: usize) -> usize {
        i
    }

    pub fn t(&self, i: usize) -> usize {
        self.chain_len + 1 + i
    }

    pub fn reward_state(&self) -> usize {
        2 * (self.chain_len + 1)
    }
}

/// Handle into the two-arm room's states.
#[derive(Debug, Clone, Copy)]
pub struct TwoArmStates {
    pub half: usize,
}

impl TwoArmStates {
    pub fn center(&self) -> usize {
        0
    }

    /// Left corridor cell `i ∈ 1..=half`.
    pub fn left(&self, i: usize) -> usize {
        i
    }

    /// Right corridor cell `i ∈ 1..=half`.
    pub fn right(&self, i: usize) -> usize {
        self.half + i
    }

    pub fn shortcut(&self) -> usize {
        2 * self.half + 1
    }

    pub fn left_terminal(&self) -> usize {
        2 * self.half + 2
    }

    pub fn right_terminal(&self) -> usize {
        2 * self.half + 3
    }
}

fn build_chain(chain_len: usize) -> Result<(TabularMDP, LatentHierarchy), EnvError> {
    if chain_len < 2 {
        return Err(EnvError::BadParameter(format!("chain length must be at least 2, got {chain_len}")));
    }
    let ids = ChainStates { chain_len };
    let n = 2 * (chain_len + 1) + 1;
    let a_n = 2;
    let mut rows = vec![0.0; n * a_n * n];
    let mut set = |s: usize, a: usize, entries: &[(usize, f64)]| {
        for &(s_next, p) in entries {
            rows[(s * a_n + a) * n + s_next] = p;
        }
    };
    for i in 0..chain_len {
        set(ids.s(i), 0, &[(ids.t(i), 0.5), (ids.s(i + 1), 0.5)]);
        set(ids.s(i), 1, &[(ids.s(i + 1), 1.0)]);
    }
    set(ids.s(chain_len), 0, &[(ids.t(chain_len), 1.0)]);
    set(ids.s(chain_len), 1, &[(ids.s(0), 1.0)]);
    for i in 0..=chain_len {
        for a in 0..a_n {
            set(ids.t(i), a, &[(ids.reward_state(), 1.0)]);
        }
    }
    for a in 0..a_n {
        set(ids.reward_state(), a, &[(ids.reward_state(), 1.0)]);
    }
    let mut rewards = vec![0.0; n * a_n];
    for a in 0..a_n {
        rewards[ids.reward_state() * a_n + a] = 1.0;
    }
    let mdp = TabularMDP::new(n, a_n, chain_len + 2, ids.s(0), rewards, rows)?;
    // Every (t_i, a) pair is an exit into the reward cluster.
    let room: Vec<usize> = (0..ids.reward_state()).collect();
    let exits: Vec<(usize, usize)> = (0..=chain_len).flat_map(|i| [(ids.t(i), 0), (ids.t(i), 1)]).collect();
    let hierarchy = LatentHierarchy::new(
        n,
        a_n,
        vec![room, vec![ids.reward_state()]],
        vec![vec![ids.s(0)], vec![ids.reward_state()]],
        vec![exits, vec![]],
    )?;
    Ok((mdp, hierarchy))
}

fn build_two_arm(horizon: usize) -> Result<(TabularMDP, LatentHierarchy), EnvError> {
    if horizon < 4 || horizon % 2 != 0 {
        return Err(EnvError::BadParameter(format!("two-arm horizon must be even and at least 4, got {horizon}")));
    }
    let half = horizon / 2;
    let ids = TwoArmStates { half };
    let n = 2 * half + 4;
    let a_n = 3;
    // Action 0 advances the left corridor, action 1 the right, action 2 is
    // the shortcut; unspecified pairs stay in place.
    let (advance_left, advance_right, shortcut_action) = (0usize, 1usize, 2usize);
    let mut rows = vec![0.0; n * a_n * n];
    {
        let mut set = |s: usize, a: usize, entries: &[(usize, f64)]| {
            for &(s_next, p) in entries {
                rows[(s * a_n + a) * n + s_next] = p;
            }
        };
        for s in 0..n {
            for a in 0..a_n {
                set(s, a, &[(s, 1.0)]);
            }
        }
        let mut replace = |s: usize, a: usize, entries: &[(usize, f64)]| {
            let base = (s * a_n + a) * n;
            rows[base..base + n].fill(0.0);
            for &(s_next, p) in entries {
                rows[base + s_next] = p;
            }
        };
        replace(ids.center(), advance_left, &[(ids.left(1), 1.0)]);
        replace(ids.center(), advance_right, &[(ids.right(1), 1.0)]);
        replace(ids.center(), shortcut_action, &[(ids.shortcut(), 1.0)]);
        for i in 1..half {
            replace(ids.left(i), advance_left, &[(ids.left(i + 1), 1.0)]);
            replace(ids.right(i), advance_right, &[(ids.right(i + 1), 1.0)]);
        }
        replace(ids.shortcut(), shortcut_action, &[(ids.left(half), 0.5), (ids.right(half), 0.5)]);
        // The two exits: continuing outward at a corridor end.
        replace(ids.left(half), advance_left, &[(ids.left_terminal(), 1.0)]);
        replace(ids.right(half), advance_right, &[(ids.right_terminal(), 1.0)]);
    }
    let mut rewards = vec![0.0; n * a_n];
    for a in 0..a_n {
        rewards[ids.left_terminal() * a_n + a] = 1.0;
        rewards[ids.right_terminal() * a_n + a] = 1.0;
    }
    let mdp = TabularMDP::new(n, a_n, horizon, ids.center(), rewards, rows)?;
    let room: Vec<usize> = (0..=ids.shortcut()).collect();
    let hierarchy = LatentHierarchy::new(
        n,
        a_n,
        vec![room, vec![ids.left_terminal()], vec![ids.right_terminal()]],
        vec![vec![ids.center()], vec![ids.left_terminal()], vec![ids.right_terminal()]],
        vec![vec![(ids.left(half), advance_left), (ids.right(half), advance_right)], vec![], vec![]],
    )?;
    Ok((mdp, hierarchy))
}

/// Builds the requested counterexample with its declared hierarchy.
///
/// # Errors
/// Rejects sizes too small for the construction to make sense.
pub fn make_counterexample_env(kind: CounterexampleKind) -> Result<(TabularMDP, LatentHierarchy), EnvError> {
    match kind {
        CounterexampleKind::HighVarianceChain { chain_len } => build_chain(chain_len),
        CounterexampleKind::TwoArmRoom { horizon } => build_two_arm(horizon),
    }
}
