//! Seeded simulation: reproducible child RNG streams, the environment-step
//! query counter, and episode rollouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MdpError;
use crate::mdp::TabularMDP;
use crate::policy::{Policy, Step, Trajectory};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent, replayable RNG stream from a root seed and a
/// hierarchical path (e.g. `[task, phase, episode]`).
///
/// The same `(root, path)` always yields the same stream, on every platform;
/// distinct paths yield statistically independent streams. This is what lets
/// any single episode be replayed in isolation.
pub fn child_rng(root: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = root ^ 0xA076_1D64_78BD_642F;
    let mut acc = splitmix64(&mut state);
    for &word in path {
        state ^= word.wrapping_mul(0xE703_7ED1_A0B4_28DB);
        acc ^= splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    let mut s = acc;
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Monotone counter of environment timesteps consumed (the query-cost unit:
/// total steps, not episodes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryCounter {
    steps: u64,
}

impl QueryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_steps(&mut self, n: u64) {
        self.steps += n;
    }

    pub fn total(&self) -> u64 {
        self.steps
    }

    /// Merges another counter into this one (order-independent addition).
    pub fn merge(&mut self, other: &QueryCounter) {
        self.steps += other.steps;
    }
}

/// Samples a next state from a probability row via inverse-CDF scan.
///
/// # Errors
/// Rejects the all-zero "unknown" row.
pub fn sample_from_row(row: &[f64], rng: &mut ChaCha8Rng) -> Result<usize, MdpError> {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    let mut last_nonzero = None;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_nonzero = Some(i);
            if u < cum {
                return Ok(i);
            }
        }
    }
    // Rows sum to exactly 1.0, so only floating-point rounding can land here.
    last_nonzero.ok_or(MdpError::UnknownRow { state: 0, action: 0 })
}

/// Rolls out one episode of `policy` from the start state.
///
/// A uniform-mixture policy draws its member once, at the start of the
/// episode. The rollout runs for the full horizon, except that it stops early
/// at a zero-reward terminal state (no further reward or information is
/// possible); every executed step is added to `counter`.
///
/// # Errors
/// Fails on dimension mismatch or when the rollout needs a dead-end
/// (all-zero) transition row.
pub fn simulate_episode(
    mdp: &TabularMDP,
    policy: &Policy,
    rng: &mut ChaCha8Rng,
    counter: &mut QueryCounter,
) -> Result<Trajectory, MdpError> {
    policy.check_compatible(mdp)?;
    let member = policy.sample_member(rng);
    let mut state = mdp.start_state();
    let mut steps = Vec::with_capacity(mdp.horizon());
    for h in 0..mdp.horizon() {
        if mdp.is_zero_reward_terminal(state) {
            break;
        }
        let action = member.act(h, state, rng);
        let row = mdp.row(h, state, action);
        let next_state = match sample_from_row(row, rng) {
            Ok(s) => s,
            Err(_) => return Err(MdpError::UnknownRow { state, action }),
        };
        let reward = mdp.reward(state, action);
        steps.push(Step { h, state, action, reward, next_state });
        counter.record_steps(1);
        state = next_state;
    }
    Ok(Trajectory { steps })
}
