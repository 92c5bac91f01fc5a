//! Backward induction vs. the brute-force policy-enumeration oracle.

use mdp_core::exhaustive::exhaustive_optimal_value;
use mdp_core::gen::{random_mdp, RandomMdpConfig};
use mdp_core::{child_rng, importance_value, value_iteration, TabularMDP};

use rand::Rng;

const CAP: u128 = 1 << 22;

#[test]
fn swap_mdp_value_from_the_enumeration_oracle() {
    // The frozen expected value 2.0 used in the unit tests originates here.
    let rewards = vec![0.0, 0.0, 1.0, 1.0];
    #[rustfmt::skip]
    let rows = vec![
        1.0, 0.0,   0.0, 1.0,
        0.0, 1.0,   1.0, 0.0,
    ];
    let m = TabularMDP::new(2, 2, 3, 0, rewards, rows).unwrap();
    let oracle = exhaustive_optimal_value(&m, None, CAP).unwrap();
    assert_eq!(oracle, 2.0);
    let (vt, _) = value_iteration(&m, None).unwrap();
    assert_eq!(vt.root_value(0), oracle);
}

#[test]
fn value_iteration_matches_enumeration_on_random_instances() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let mut rng = child_rng(1000 + seed, &[]);
        let s_n = rng.gen_range(2..=5);
        let a_n = 2;
        let horizon = rng.gen_range(1..=3);
        let cfg = RandomMdpConfig::new(s_n, a_n, horizon);
        let m = random_mdp(&cfg, &mut rng);
        let oracle = exhaustive_optimal_value(&m, None, CAP).unwrap();
        let (vt, _) = value_iteration(&m, None).unwrap();
        assert!(
            (vt.root_value(m.start_state()) - oracle).abs() < 1e-9,
            "seed {seed}: vi {} vs oracle {oracle}",
            vt.root_value(m.start_state())
        );
        checked += 1;
    }
    assert_eq!(checked, 60);
}

#[test]
fn value_iteration_matches_enumeration_with_reward_overrides() {
    for seed in 0..20u64 {
        let mut rng = child_rng(2000 + seed, &[]);
        let cfg = RandomMdpConfig::new(3, 2, 3);
        let m = random_mdp(&cfg, &mut rng);
        let alt: Vec<f64> = (0..6).map(|_| rng.gen::<f64>()).collect();
        let oracle = exhaustive_optimal_value(&m, Some(&alt), CAP).unwrap();
        let (vt, _) = value_iteration(&m, Some(&alt)).unwrap();
        assert!((vt.root_value(0) - oracle).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn importance_gap_matches_enumeration_of_the_removed_mdp() {
    for seed in 0..25u64 {
        let mut rng = child_rng(3000 + seed, &[]);
        let cfg = RandomMdpConfig::new(5, 2, 3);
        let m = random_mdp(&cfg, &mut rng);
        let s = rng.gen_range(0..5);
        let a = rng.gen_range(0..2);
        let (v, v_removed) = importance_value(&m, (s, a)).unwrap();
        let oracle_v = exhaustive_optimal_value(&m, None, CAP).unwrap();
        let removed = m.with_pair_rerouted_to_sink(s, a).unwrap();
        let oracle_removed = exhaustive_optimal_value(&removed, None, CAP).unwrap();
        assert!((v - oracle_v).abs() < 1e-9, "seed {seed}: base value");
        assert!((v_removed - oracle_removed).abs() < 1e-9, "seed {seed}: removed value");
        assert!(v_removed <= v + 1e-9, "removing a pair can only lower the optimum (seed {seed})");
    }
}

#[test]
fn per_step_dynamics_agree_with_enumeration() {
    // Time-varying instances exercise the P^(h) path in both planners.
    for seed in 0..15u64 {
        let mut rng = child_rng(4000 + seed, &[]);
        let (s_n, a_n, horizon) = (3, 2, 3);
        let cfg = RandomMdpConfig::new(s_n, a_n, horizon);
        // Build per-step rows from independently drawn stationary MDPs.
        let mut rewards = Vec::new();
        let mut per_step = Vec::new();
        for h in 0..horizon {
            let m = random_mdp(&cfg, &mut rng);
            if h == 0 {
                rewards = m.rewards().to_vec();
            }
            for s in 0..s_n {
                for a in 0..a_n {
                    per_step.extend_from_slice(m.stationary_row(s, a));
                }
            }
        }
        let m = TabularMDP::new_per_step(s_n, a_n, horizon, 0, rewards, per_step).unwrap();
        let oracle = exhaustive_optimal_value(&m, None, CAP).unwrap();
        let (vt, _) = value_iteration(&m, None).unwrap();
        assert!((vt.root_value(0) - oracle).abs() < 1e-9, "seed {seed}");
    }
}
