//! Exact structural identities relating values, occupancies, and visitation
//! probabilities across pairs of MDPs that share rewards but differ in some
//! transition rows.

use mdp_core::gen::{random_mdp, random_policy, RandomMdpConfig};
use mdp_core::{
    child_rng, occupancy, pairs_visit_probability, policy_value, value_iteration, Policy,
    TabularMDP,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Copies `n_rows` randomly chosen transition rows from a freshly drawn MDP
/// into `base`, returning the altered MDP and the changed pairs.
fn perturb_rows(
    base: &TabularMDP,
    cfg: &RandomMdpConfig,
    n_rows: usize,
    rng: &mut ChaCha8Rng,
) -> (TabularMDP, Vec<(usize, usize)>) {
    let donor = random_mdp(cfg, rng);
    let mut out = base.clone();
    let mut changed = Vec::new();
    while changed.len() < n_rows {
        let s = rng.gen_range(0..base.num_states());
        let a = rng.gen_range(0..base.num_actions());
        if changed.contains(&(s, a)) {
            continue;
        }
        let row = donor.stationary_row(s, a).to_vec();
        out.set_row(s, a, &row).expect("donor row is valid");
        changed.push((s, a));
    }
    (out, changed)
}

/// `V^{M',π} − V^{M,π}` must equal the occupancy-weighted one-step model
/// differences `Σ_h Σ_{s,a} d_h^{M,π}(s,a) · (P'−P)(·|s,a) · V^{M',π}_{h+1}`.
fn assert_value_difference_identity(m: &TabularMDP, m2: &TabularMDP, policy: &Policy, tag: &str) {
    let occ = occupancy(m, policy).unwrap();
    let vt2 = policy_value(m2, policy).unwrap();
    let v1 = policy_value(m, policy).unwrap().root_value(m.start_state());
    let lhs = vt2.root_value(m2.start_state()) - v1;
    let mut rhs = 0.0;
    for h in 0..m.horizon() {
        for s in 0..m.num_states() {
            for a in 0..m.num_actions() {
                let mass = occ.d(h, s, a);
                if mass == 0.0 {
                    continue;
                }
                let row1 = m.row(h, s, a);
                let row2 = m2.row(h, s, a);
                let mut delta_value = 0.0;
                for s_next in 0..m.num_states() {
                    delta_value += (row2[s_next] - row1[s_next]) * vt2.v(h + 1, s_next);
                }
                rhs += mass * delta_value;
            }
        }
    }
    assert!(
        (lhs - rhs).abs() < 1e-9,
        "{tag}: value difference {lhs} vs occupancy decomposition {rhs}"
    );
}

#[test]
fn value_difference_decomposes_over_occupancy_for_deterministic_policies() {
    for seed in 0..40u64 {
        let mut rng = child_rng(5000 + seed, &[]);
        let cfg = RandomMdpConfig::new(5, 2, 4);
        let m = random_mdp(&cfg, &mut rng);
        let (m2, _) = perturb_rows(&m, &cfg, 3, &mut rng);
        let pol = Policy::Deterministic(random_policy(5, 2, 4, &mut rng));
        assert_value_difference_identity(&m, &m2, &pol, &format!("seed {seed}"));
    }
}

#[test]
fn value_difference_decomposes_over_occupancy_for_uniform_action_states() {
    // A policy that randomizes uniformly at some states is still one Markov
    // policy, so the decomposition must stay exact.
    for seed in 0..20u64 {
        let mut rng = child_rng(6000 + seed, &[]);
        let cfg = RandomMdpConfig::new(4, 3, 4);
        let m = random_mdp(&cfg, &mut rng);
        let (m2, _) = perturb_rows(&m, &cfg, 2, &mut rng);
        let mut det = random_policy(4, 3, 4, &mut rng);
        det.set_uniform_at(rng.gen_range(0..4));
        det.set_uniform_at(rng.gen_range(0..4));
        assert_value_difference_identity(&m, &m2, &Policy::Deterministic(det), &format!("seed {seed}"));
    }
}

#[test]
fn value_difference_is_zero_when_no_row_changes() {
    let mut rng = child_rng(6500, &[]);
    let cfg = RandomMdpConfig::new(4, 2, 3);
    let m = random_mdp(&cfg, &mut rng);
    let pol = Policy::Deterministic(random_policy(4, 2, 3, &mut rng));
    assert_value_difference_identity(&m, &m.clone(), &pol, "identical models");
}

#[test]
fn value_gap_over_optimum_forces_visiting_the_changed_rows() {
    // Whenever a policy beats the first model's optimum inside the second
    // model by a gap, it must take a changed pair (in the first model) with
    // probability strictly above (0.999 · gap) / H; the exact chain is
    // H · P[hit] ≥ V^{M',π} − V^{M,π} ≥ V^{M',π} − V^{M,*} = gap.
    let mut positive_cases = 0;
    for seed in 0..160u64 {
        let mut rng = child_rng(7000 + seed, &[]);
        let cfg = RandomMdpConfig::new(4, 2, 4);
        let m = random_mdp(&cfg, &mut rng);
        let (m2, changed) = perturb_rows(&m, &cfg, 3, &mut rng);
        let (_, pol2) = value_iteration(&m2, None).unwrap();
        let pol = Policy::Deterministic(pol2);
        let v_prime = policy_value(&m2, &pol).unwrap().root_value(m2.start_state());
        let (vt_star, _) = value_iteration(&m, None).unwrap();
        let gap = v_prime - vt_star.root_value(m.start_state());
        if gap <= 1e-6 {
            continue;
        }
        positive_cases += 1;
        let hit = pairs_visit_probability(&m, &pol, &changed).unwrap();
        let rho = 0.999 * gap;
        let h = m.horizon() as f64;
        assert!(
            hit > rho / h,
            "seed {seed}: hit probability {hit} must exceed {}",
            rho / h
        );
        assert!(hit * h >= gap - 1e-9, "seed {seed}: slack form of the bound");
    }
    assert!(
        positive_cases >= 30,
        "need enough gap-positive instances to make the property meaningful, got {positive_cases}"
    );
}
