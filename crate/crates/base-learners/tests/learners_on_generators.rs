//! The learners exercised on the workspace's environment generators: the
//! tree gamble, a gated grid, and the determinism contract downstream
//! experiment outputs rely on.

use base_learners::{run_euler, run_ucbvi, LearnerBudget};
use env_suite::{make_binary_tree_mdp, make_four_room_family, BinaryTreeSpec, FourRoomSpec, Room, TreeVariant};
use mdp_core::{child_rng, pairs_visit_probability, policy_value, value_iteration, Policy};

#[test]
fn ucbvi_regret_on_the_tree_gamble_is_sublinear() {
    // Telling the rewarded leaf apart from its 0.1-weaker siblings is the
    // slow part for a structure-blind learner; the regret must still grow
    // sublinearly, and play must beat wandering even when not yet optimal.
    let spec = BinaryTreeSpec {
        depth: 3,
        target_leaf: vec![1, 0],
        target_action: 1,
        gate_exit: 0,
        bonus: 0.1,
        horizon: 11,
    };
    let (mdp, _) = make_binary_tree_mdp(&spec, TreeVariant::Reduced).unwrap();
    let (vt, _) = value_iteration(&mdp, None).unwrap();
    let v_star = vt.root_value(mdp.start_state());
    assert!((v_star - 4.2).abs() < 1e-9, "(H - W - 1)(1/2 + bonus) = 7 * 0.6");
    let n = 750;
    let budget = LearnerBudget::new(2 * n, 0.3, 0.1).unwrap();
    let (mut regret_n, mut regret_2n, mut tail_mean) = (0.0, 0.0, 0.0);
    let seeds = 10;
    for seed in 0..seeds {
        let mut rng = child_rng(77 + seed, &[0]);
        let (set, counter) = run_ucbvi(&mdp, &budget, &mut rng).unwrap();
        assert_eq!(counter.total(), 2 * n as u64 * 11);
        regret_n += set.returns()[..n].iter().map(|r| v_star - r).sum::<f64>();
        regret_2n += set.cumulative_regret(v_star);
        let last = &set.returns()[2 * n - 200..];
        tail_mean += last.iter().sum::<f64>() / (200.0 * seeds as f64);
    }
    assert!(regret_2n <= 1.75 * regret_n, "Regret(2N) = {regret_2n} vs Regret(N) = {regret_n}");
    assert!(tail_mean >= 3.0, "late play should commit to some gate-bound leaf, got {tail_mean}");
}

fn small_grid_task(slip: f64) -> mdp_core::TabularMDP {
    let corner = |room: Room| match room {
        Room::A => (0, 0),
        Room::B => (0, 4),
        Room::C => (4, 0),
        Room::D => (4, 4),
    };
    let base = FourRoomSpec {
        side: 5,
        horizon: 16,
        slip,
        dummy_start: true,
        gates_open: [true; 4],
        start_cell: corner(Room::A),
        goal_cell: corner(Room::D),
    };
    // The sibling task flips every gate and moves the start so that each exit
    // row (and the entry jump) differs somewhere across the family.
    let other = FourRoomSpec { gates_open: [false; 4], start_cell: corner(Room::B), ..base };
    let fam = make_four_room_family(&[base, other]).unwrap();
    fam.task(0).clone()
}

#[test]
fn euler_reaches_a_far_grid_cell_with_high_probability() {
    let mdp = small_grid_task(0.0);
    let goal = mdp.num_states() - 2; // a late room cell, far from the start
    let mut reward = vec![0.0; mdp.num_states() * mdp.num_actions()];
    for a in 0..mdp.num_actions() {
        reward[goal * mdp.num_actions() + a] = 1.0;
    }
    let n = 30 * mdp.num_states() * mdp.num_actions();
    let budget = LearnerBudget::new(n, 0.1, 0.1).unwrap();
    let mut rng = child_rng(78, &[0]);
    let (set, _) = run_euler(&mdp, Some(&reward), &budget, &mut rng).unwrap();
    let pairs: Vec<(usize, usize)> = (0..mdp.num_actions()).map(|a| (goal, a)).collect();
    let reach = pairs_visit_probability(&mdp, &set.mixture(), &pairs).unwrap();
    assert!(reach >= 0.9, "mixture reach probability {reach}");
}

#[test]
fn identical_seeds_reproduce_the_learner_run_exactly() {
    let mdp = small_grid_task(0.1);
    // A small bonus scale leaves the all-ties optimistic ceiling quickly, so
    // the plans themselves become sensitive to the sampled transitions.
    let budget = LearnerBudget::new(60, 0.1, 0.1).unwrap();
    let (set_a, count_a) = run_ucbvi(&mdp, &budget, &mut child_rng(5, &[1, 2])).unwrap();
    let (set_b, count_b) = run_ucbvi(&mdp, &budget, &mut child_rng(5, &[1, 2])).unwrap();
    assert_eq!(set_a.to_text(), set_b.to_text());
    assert_eq!(count_a.total(), count_b.total());
    let (set_c, _) = run_ucbvi(&mdp, &budget, &mut child_rng(6, &[1, 2])).unwrap();
    assert_ne!(
        set_a.to_text(),
        set_c.to_text(),
        "different seeds should visit differently and plan differently under slippery moves"
    );
}
