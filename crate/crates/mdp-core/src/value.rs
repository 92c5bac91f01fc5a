//! Exact planning and evaluation: backward-induction value iteration, policy
//! evaluation, occupancy measures, and the derived reachability/importance
//! quantities building on them.

use crate::error::MdpError;
use crate::mdp::TabularMDP;
use crate::policy::{DetPolicy, Policy};

/// Optimal or policy value tables `V_h(s)` (for `h ∈ [0, H]`, with `V_H ≡ 0`)
/// and `Q_h(s,a)` (for `h ∈ [0, H-1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    v: Vec<f64>,
    q: Vec<f64>,
}

impl ValueTable {
    fn zeroed(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self {
            horizon,
            num_states,
            num_actions,
            v: vec![0.0; (horizon + 1) * num_states],
            q: vec![0.0; horizon * num_states * num_actions],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v[h * self.num_states + s]
    }

    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[(h * self.num_states + s) * self.num_actions + a]
    }

    /// Value of the start state at `h = 0`.
    pub fn root_value(&self, start_state: usize) -> f64 {
        self.v(0, start_state)
    }

    /// Greedy deterministic policy; ties break toward the lowest action index.
    pub fn greedy_policy(&self) -> DetPolicy {
        let mut actions = Vec::with_capacity(self.horizon * self.num_states);
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                let mut best_a = 0;
                let mut best_q = self.q(h, s, 0);
                for a in 1..self.num_actions {
                    let q = self.q(h, s, a);
                    if q > best_q {
                        best_q = q;
                        best_a = a;
                    }
                }
                actions.push(best_a);
            }
        }
        DetPolicy::new(self.horizon, self.num_states, self.num_actions, actions).expect("greedy table is in range")
    }

    fn set_v(&mut self, h: usize, s: usize, value: f64) {
        self.v[h * self.num_states + s] = value;
    }

    fn set_q(&mut self, h: usize, s: usize, a: usize, value: f64) {
        self.q[(h * self.num_states + s) * self.num_actions + a] = value;
    }
}

fn pick_rewards<'a>(mdp: &'a TabularMDP, rewards_override: Option<&'a [f64]>) -> Result<&'a [f64], MdpError> {
    match rewards_override {
        Some(r) => {
            let expected = mdp.num_states() * mdp.num_actions();
            if r.len() != expected {
                return Err(MdpError::ShapeMismatch { what: "reward override", expected, got: r.len() });
            }
            Ok(r)
        }
        None => Ok(mdp.rewards()),
    }
}

/// Exact optimal values by backward induction, plus the greedy policy.
///
/// Dead-end rows (all-zero) contribute nothing beyond their immediate
/// reward. The greedy policy breaks ties toward the lowest action index.
pub fn value_iteration(mdp: &TabularMDP, rewards_override: Option<&[f64]>) -> Result<(ValueTable, DetPolicy), MdpError> {
    let rewards = pick_rewards(mdp, rewards_override)?;
    let (s_n, a_n, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut table = ValueTable::zeroed(horizon, s_n, a_n);
    for h in (0..horizon).rev() {
        for s in 0..s_n {
            let mut best = f64::NEG_INFINITY;
            for a in 0..a_n {
                let row = mdp.row(h, s, a);
                let mut q = rewards[s * a_n + a];
                for (s_next, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        q += p * table.v(h + 1, s_next);
                    }
                }
                table.set_q(h, s, a, q);
                if q > best {
                    best = q;
                }
            }
            table.set_v(h, s, best);
        }
    }
    let greedy = table.greedy_policy();
    Ok((table, greedy))
}

fn det_policy_value(mdp: &TabularMDP, policy: &DetPolicy, rewards: &[f64]) -> ValueTable {
    let (s_n, a_n, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut table = ValueTable::zeroed(horizon, s_n, a_n);
    for h in (0..horizon).rev() {
        for s in 0..s_n {
            let mut v = 0.0;
            for a in 0..a_n {
                let row = mdp.row(h, s, a);
                let mut q = rewards[s * a_n + a];
                for (s_next, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        q += p * table.v(h + 1, s_next);
                    }
                }
                table.set_q(h, s, a, q);
                v += policy.action_prob(h, s, a) * q;
            }
            table.set_v(h, s, v);
        }
    }
    table
}

/// Exact policy evaluation by backward induction.
///
/// For a uniform mixture the returned table is the average of the member
/// tables (the value of "draw a member uniformly, then play it").
pub fn policy_value(mdp: &TabularMDP, policy: &Policy) -> Result<ValueTable, MdpError> {
    policy_value_with_rewards(mdp, policy, None)
}

/// [`policy_value`] with an optional reward override.
pub fn policy_value_with_rewards(
    mdp: &TabularMDP,
    policy: &Policy,
    rewards_override: Option<&[f64]>,
) -> Result<ValueTable, MdpError> {
    policy.check_compatible(mdp)?;
    let rewards = pick_rewards(mdp, rewards_override)?;
    let members = policy.members();
    let mut avg = ValueTable::zeroed(mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let weight = 1.0 / members.len() as f64;
    for member in members {
        let table = det_policy_value(mdp, member, rewards);
        for (dst, src) in avg.v.iter_mut().zip(table.v.iter()) {
            *dst += weight * src;
        }
        for (dst, src) in avg.q.iter_mut().zip(table.q.iter()) {
            *dst += weight * src;
        }
    }
    Ok(avg)
}

/// Visitation probabilities `d_h(s,a)` under a policy started from `s₀`.
///
/// Rows sum to 1 per `h` on fully stochastic MDPs; dead-end rows leak mass,
/// so on planning problems with unknown rows the sums may fall below 1.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    d: Vec<f64>,
}

impl OccupancyMeasure {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn d(&self, h: usize, s: usize, a: usize) -> f64 {
        self.d[(h * self.num_states + s) * self.num_actions + a]
    }

    /// Marginal probability of being at `s` at step `h`.
    pub fn state_prob(&self, h: usize, s: usize) -> f64 {
        (0..self.num_actions).map(|a| self.d(h, s, a)).sum()
    }

    /// Total mass at step `h` (1 unless dead ends leak probability).
    pub fn level_mass(&self, h: usize) -> f64 {
        let base = h * self.num_states * self.num_actions;
        self.d[base..base + self.num_states * self.num_actions].iter().sum()
    }

    /// `Σ_h Σ_{s,a} d_h(s,a) · r(s,a)` — equals the policy value exactly.
    pub fn expected_return(&self, rewards: &[f64]) -> f64 {
        let mut total = 0.0;
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                for a in 0..self.num_actions {
                    total += self.d(h, s, a) * rewards[s * self.num_actions + a];
                }
            }
        }
        total
    }
}

/// Exact occupancy measure by forward recursion from `δ(s₀)`.
///
/// For a uniform mixture the result is the average of member occupancies.
pub fn occupancy(mdp: &TabularMDP, policy: &Policy) -> Result<OccupancyMeasure, MdpError> {
    policy.check_compatible(mdp)?;
    let (s_n, a_n, horizon) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let members = policy.members();
    let weight = 1.0 / members.len() as f64;
    let mut out = OccupancyMeasure { horizon, num_states: s_n, num_actions: a_n, d: vec![0.0; horizon * s_n * a_n] };
    for member in members {
        let mut state_dist = vec![0.0; s_n];
        state_dist[mdp.start_state()] = 1.0;
        for h in 0..horizon {
            let mut next_dist = vec![0.0; s_n];
            for s in 0..s_n {
                let p_s = state_dist[s];
                if p_s == 0.0 {
                    continue;
                }
                for a in 0..a_n {
                    let p_a = member.action_prob(h, s, a);
                    if p_a == 0.0 {
                        continue;
                    }
                    let mass = p_s * p_a;
                    out.d[(h * s_n + s) * a_n + a] += weight * mass;
                    for (s_next, &p) in mdp.row(h, s, a).iter().enumerate() {
                        if p > 0.0 {
                            next_dist[s_next] += mass * p;
                        }
                    }
                }
            }
            state_dist = next_dist;
        }
    }
    Ok(out)
}

/// Optimal value of the MDP and of its pair-removed variant, where taking
/// `(s, a)` leads to a fresh zero-reward terminal.
///
/// The pair is α-important exactly when the gap between the two exceeds α.
pub fn importance_value(mdp: &TabularMDP, pair: (usize, usize)) -> Result<(f64, f64), MdpError> {
    let (vt, _) = value_iteration(mdp, None)?;
    let removed = mdp.with_pair_rerouted_to_sink(pair.0, pair.1)?;
    let (vt_removed, _) = value_iteration(&removed, None)?;
    Ok((vt.root_value(mdp.start_state()), vt_removed.root_value(removed.start_state())))
}

/// Builds the first-visit reachability problem for a set of pairs: every pair
/// in `pairs` is rerouted to a fresh zero-reward sink and is the only source
/// of reward (1 on taking it), so any policy's root value in the result is
/// exactly the probability of ever taking a pair in the set.
fn first_visit_problem(mdp: &TabularMDP, pairs: &[(usize, usize)]) -> Result<TabularMDP, MdpError> {
    let (mut out, sink) = mdp.with_sink_appended()?;
    let zero = vec![0.0; out.num_states() * out.num_actions()];
    out = out.with_rewards(zero)?;
    let mut sink_row = vec![0.0; out.num_states()];
    sink_row[sink] = 1.0;
    for &(s, a) in pairs {
        if s >= mdp.num_states() {
            return Err(MdpError::IndexOutOfRange { what: "state", index: s, bound: mdp.num_states() });
        }
        if a >= mdp.num_actions() {
            return Err(MdpError::IndexOutOfRange { what: "action", index: a, bound: mdp.num_actions() });
        }
        out.set_row(s, a, &sink_row)?;
        out.set_reward(s, a, 1.0)?;
    }
    Ok(out)
}

/// Maximum over policies of the probability of visiting `target` within the
/// horizon (`mdp.horizon()` by default, or `horizon_override`).
///
/// Computed exactly: make every action at `target` lead to a fresh sink and
/// pay reward 1, zero all other rewards; the optimal value is the first-visit
/// probability.
pub fn significance(mdp: &TabularMDP, target: usize, horizon_override: Option<usize>) -> Result<f64, MdpError> {
    if target >= mdp.num_states() {
        return Err(MdpError::IndexOutOfRange { what: "state", index: target, bound: mdp.num_states() });
    }
    let pairs: Vec<(usize, usize)> = (0..mdp.num_actions()).map(|a| (target, a)).collect();
    let base = match horizon_override {
        Some(h) => mdp.with_horizon(h)?,
        None => mdp.clone(),
    };
    let problem = first_visit_problem(&base, &pairs)?;
    let (vt, _) = value_iteration(&problem, None)?;
    Ok(vt.root_value(problem.start_state()))
}

/// Exact probability that a rollout of `policy` takes some pair in `pairs`.
pub fn pairs_visit_probability(
    mdp: &TabularMDP,
    policy: &Policy,
    pairs: &[(usize, usize)],
) -> Result<f64, MdpError> {
    let problem = first_visit_problem(mdp, pairs)?;
    let extended = match policy {
        Policy::Deterministic(p) => Policy::Deterministic(p.extended_to(problem.num_states())),
        Policy::UniformMixture(ps) => {
            Policy::UniformMixture(ps.iter().map(|p| p.extended_to(problem.num_states())).collect())
        }
    };
    let vt = policy_value(&problem, &extended)?;
    Ok(vt.root_value(problem.start_state()))
}

/// Exact probability that a rollout of `policy` takes the pair `(s, a)`.
pub fn pair_visit_probability(mdp: &TabularMDP, policy: &Policy, s: usize, a: usize) -> Result<f64, MdpError> {
    pairs_visit_probability(mdp, policy, &[(s, a)])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Same 2-state instance as `mdp::tests::two_state_swap`: action 1 swaps
    /// states, action 0 stays, reward 1 at state 1, H=3, start 0.
    fn two_state_swap() -> TabularMDP {
        let rewards = vec![0.0, 0.0, 1.0, 1.0];
        #[rustfmt::skip]
        let rows = vec![
            1.0, 0.0,   0.0, 1.0,
            0.0, 1.0,   1.0, 0.0,
        ];
        TabularMDP::new(2, 2, 3, 0, rewards, rows).expect("valid MDP")
    }

    #[test]
    fn swap_mdp_optimal_value_is_two() {
        // Expected value frozen from the exhaustive policy enumeration oracle
        // (see tests/oracle_agreement.rs): swap at h=0, then collect the
        // state-1 reward at h=1 and h=2.
        let m = two_state_swap();
        let (vt, greedy) = value_iteration(&m, None).unwrap();
        assert_eq!(vt.root_value(0), 2.0);
        assert_eq!(greedy.action(0, 0), 1, "swap is strictly better at h=0");
        assert_eq!(greedy.action(1, 1), 0, "staying keeps collecting reward (ties break low, stay wins outright)");
        // V invariants: V_H = 0 and 0 <= V_h <= H - h.
        for s in 0..2 {
            assert_eq!(vt.v(3, s), 0.0);
            for h in 0..3 {
                assert!(vt.v(h, s) >= 0.0 && vt.v(h, s) <= (3 - h) as f64);
            }
        }
    }

    #[test]
    fn zero_rewards_give_zero_value() {
        let m = two_state_swap().with_rewards(vec![0.0; 4]).unwrap();
        let (vt, _) = value_iteration(&m, None).unwrap();
        assert_eq!(vt.root_value(0), 0.0);
    }

    #[test]
    fn reward_override_matches_rebuilt_mdp() {
        let m = two_state_swap();
        let alt = vec![0.25, 0.0, 0.5, 1.0];
        let (vt_override, _) = value_iteration(&m, Some(&alt)).unwrap();
        let rebuilt = m.with_rewards(alt).unwrap();
        let (vt_rebuilt, _) = value_iteration(&rebuilt, None).unwrap();
        assert_eq!(vt_override.root_value(0), vt_rebuilt.root_value(0));
    }

    #[test]
    fn optimal_policy_value_matches_value_iteration() {
        let m = two_state_swap();
        let (vt, greedy) = value_iteration(&m, None).unwrap();
        let pv = policy_value(&m, &greedy.clone().into()).unwrap();
        assert!((pv.root_value(0) - vt.root_value(0)).abs() < 1e-12);
    }

    #[test]
    fn always_stay_policy_earns_nothing_from_state_zero() {
        let m = two_state_swap();
        let stay = DetPolicy::constant(3, 2, 2, 0).unwrap();
        let pv = policy_value(&m, &stay.into()).unwrap();
        assert_eq!(pv.root_value(0), 0.0);
    }

    #[test]
    fn policy_into_zero_reward_terminal_earns_nothing() {
        // State 1 is a zero-reward terminal; jumping straight in yields 0.
        let rewards = vec![0.0, 0.0, 0.0, 0.0];
        #[rustfmt::skip]
        let rows = vec![
            1.0, 0.0,   0.0, 1.0,
            0.0, 1.0,   0.0, 1.0,
        ];
        let m = TabularMDP::new(2, 2, 4, 0, rewards, rows).unwrap();
        assert!(m.is_zero_reward_terminal(1));
        let jump = DetPolicy::constant(4, 2, 2, 1).unwrap();
        let pv = policy_value(&m, &jump.into()).unwrap();
        assert_eq!(pv.root_value(0), 0.0);
    }

    #[test]
    fn mixture_value_is_average_of_members() {
        let m = two_state_swap();
        let (_, greedy) = value_iteration(&m, None).unwrap();
        let stay = DetPolicy::constant(3, 2, 2, 0).unwrap();
        let v_greedy = policy_value(&m, &greedy.clone().into()).unwrap().root_value(0);
        let v_stay = policy_value(&m, &stay.clone().into()).unwrap().root_value(0);
        let mix = Policy::UniformMixture(vec![greedy, stay]);
        let v_mix = policy_value(&m, &mix).unwrap().root_value(0);
        assert!((v_mix - 0.5 * (v_greedy + v_stay)).abs() < 1e-12);
    }

    #[test]
    fn occupancy_level_zero_is_a_point_mass() {
        let m = two_state_swap();
        let (_, greedy) = value_iteration(&m, None).unwrap();
        let occ = occupancy(&m, &greedy.clone().into()).unwrap();
        assert_eq!(occ.d(0, 0, greedy.action(0, 0)), 1.0);
        assert_eq!(occ.level_mass(0), 1.0);
        // Deterministic MDP + deterministic policy: occupancy is 0/1-valued.
        for h in 0..3 {
            for s in 0..2 {
                for a in 0..2 {
                    let d = occ.d(h, s, a);
                    assert!(d == 0.0 || d == 1.0, "d({h},{s},{a}) = {d}");
                }
            }
        }
    }

    #[test]
    fn occupancy_return_identity_matches_policy_value() {
        let m = two_state_swap();
        let (_, greedy) = value_iteration(&m, None).unwrap();
        let policy: Policy = greedy.into();
        let occ = occupancy(&m, &policy).unwrap();
        let pv = policy_value(&m, &policy).unwrap();
        assert!((occ.expected_return(m.rewards()) - pv.root_value(0)).abs() < 1e-12);
    }

    #[test]
    fn importance_of_unreachable_pair_is_zero_gap() {
        // Action 0 self-loops everywhere; state 1 unreachable from 0.
        let rewards = vec![0.4, 0.4, 0.9, 0.9];
        #[rustfmt::skip]
        let rows = vec![
            1.0, 0.0,   1.0, 0.0,
            0.0, 1.0,   0.0, 1.0,
        ];
        let m = TabularMDP::new(2, 2, 3, 0, rewards, rows).unwrap();
        let (v, v_removed) = importance_value(&m, (1, 0)).unwrap();
        assert!((v - v_removed).abs() < 1e-12, "removing an unreachable pair cannot change the value");
    }

    #[test]
    fn importance_of_the_only_path_is_the_full_value() {
        // Start must take (0, 1) to reach the rewarding state.
        let m = two_state_swap();
        let (v, v_removed) = importance_value(&m, (0, 1)).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(v_removed, 0.0, "with the swap removed nothing is ever earned");
    }

    #[test]
    fn significance_of_start_is_one_and_disconnected_is_zero() {
        let m = two_state_swap();
        assert_eq!(significance(&m, 0, None).unwrap(), 1.0);
        let rewards = vec![0.0, 0.0];
        let rows = vec![1.0, 0.0, 0.0, 1.0];
        let disconnected = TabularMDP::new(2, 1, 3, 0, rewards, rows).unwrap();
        assert_eq!(significance(&disconnected, 1, None).unwrap(), 0.0);
        assert_eq!(significance(&disconnected, 1, Some(6)).unwrap(), 0.0, "doubling the horizon cannot help");
    }

    #[test]
    fn pair_visit_probability_counts_first_visits_only() {
        let m = two_state_swap();
        let (_, greedy) = value_iteration(&m, None).unwrap();
        let p = pair_visit_probability(&m, &greedy.clone().into(), 0, 1).unwrap();
        assert_eq!(p, 1.0, "the greedy policy swaps at h=0");
        let p_stay_pair = pair_visit_probability(&m, &greedy.into(), 0, 0).unwrap();
        assert_eq!(p_stay_pair, 0.0, "the greedy policy never stays at state 0");
    }

    #[test]
    fn stochastic_visit_probability_is_exact() {
        // From 0, action 0: 0.3 to state 1 (then terminal), 0.7 stay at 0.
        let rewards = vec![0.0, 0.0];
        let rows = vec![0.7, 0.3, 0.0, 1.0];
        let m = TabularMDP::new(2, 1, 2, 0, rewards, rows).unwrap();
        let pol = DetPolicy::constant(2, 2, 1, 0).unwrap();
        let p = pair_visit_probability(&m, &pol.into(), 1, 0).unwrap();
        // Reaching state 1 by the last acting step (h=1) has probability 0.3.
        assert!((p - 0.3).abs() < 1e-12);
        let p_state = significance(&m, 1, None).unwrap();
        assert!((p_state - 0.3).abs() < 1e-12);
    }
}
