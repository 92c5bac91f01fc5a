//! Brute-force reference planner: exact optimum by enumerating every
//! deterministic nonstationary policy.
//!
//! Only viable on tiny instances (`A^(S·H)` policies), but it shares no code
//! with backward induction, which makes it the independent oracle the
//! planning tests compare against.

use crate::error::MdpError;
use crate::mdp::TabularMDP;

/// Number of deterministic nonstationary policies, `A^(S·H)`, saturating.
pub fn count_det_policies(num_states: usize, num_actions: usize, horizon: usize) -> u128 {
    let mut count: u128 = 1;
    for _ in 0..num_states * horizon {
        count = count.saturating_mul(num_actions as u128);
    }
    count
}

/// Exact optimal root value by evaluating every deterministic nonstationary
/// policy, with an optional reward override.
///
/// # Errors
/// Refuses instances needing more than `cap` policy evaluations.
pub fn exhaustive_optimal_value(
    mdp: &TabularMDP,
    rewards_override: Option<&[f64]>,
    cap: u128,
) -> Result<f64, MdpError> {
    let (s_n, a_n, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let rewards = match rewards_override {
        Some(r) => {
            if r.len() != s_n * a_n {
                return Err(MdpError::ShapeMismatch { what: "reward override", expected: s_n * a_n, got: r.len() });
            }
            r
        }
        None => mdp.rewards(),
    };
    let needed = count_det_policies(s_n, a_n, horizon);
    if needed > cap {
        return Err(MdpError::EnumerationTooLarge { needed, cap });
    }

    // Odometer over the policy table: digits[h * S + s] = action at (h, s).
    let mut digits = vec![0usize; horizon * s_n];
    let mut best = f64::NEG_INFINITY;
    let mut v_next = vec![0.0f64; s_n];
    let mut v_cur = vec![0.0f64; s_n];
    loop {
        // Evaluate the policy encoded by `digits` by backward induction.
        v_next.iter_mut().for_each(|v| *v = 0.0);
        for h in (0..horizon).rev() {
            for s in 0..s_n {
                let a = digits[h * s_n + s];
                let row = mdp.row(h, s, a);
                let mut q = rewards[s * a_n + a];
                for (s2, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        q += p * v_next[s2];
                    }
                }
                v_cur[s] = q;
            }
            std::mem::swap(&mut v_next, &mut v_cur);
        }
        let value = v_next[mdp.start_state()];
        if value > best {
            best = value;
        }

        // Advance the odometer; done once it wraps.
        let mut pos = 0;
        loop {
            if pos == digits.len() {
                return Ok(best);
            }
            digits[pos] += 1;
            if digits[pos] < a_n {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_count_formula() {
        assert_eq!(count_det_policies(2, 2, 3), 64);
        assert_eq!(count_det_policies(1, 3, 2), 9);
        assert_eq!(count_det_policies(5, 2, 4), 1 << 20);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let m = TabularMDP::new(2, 2, 3, 0, vec![0.0; 4], vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            exhaustive_optimal_value(&m, None, 10),
            Err(MdpError::EnumerationTooLarge { needed: 64, cap: 10 })
        ));
    }

    #[test]
    fn trivial_single_policy_instance() {
        // One state, one action, self-loop with reward 0.3, H=4: value 1.2.
        let m = TabularMDP::new(1, 1, 4, 0, vec![0.3], vec![1.0]).unwrap();
        let v = exhaustive_optimal_value(&m, None, 10).unwrap();
        assert!((v - 1.2).abs() < 1e-12);
    }
}
