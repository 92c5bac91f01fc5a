use std::time::Instant;

use env_suite::{benchmark_four_room_specs, make_four_room_family};
use mdp_core::{child_rng, value_iteration};
use meta_train::{brute_force_hierarchy, run_exit_discovery, MetaTrainConfig};

fn bench_cfg() -> MetaTrainConfig {
    MetaTrainConfig {
        n_ucbvi: 1200,
        n_ts: 300,
        n_ts_thresh: 10,
        n_rf_euler: 800,
        n_rf: 30_000,
        n_ed: 40,
        n_ed_thresh: 5,
        n_el_euler: 600,
        n_el: 120,
        n_el_thresh: 5,
        ..MetaTrainConfig::default()
    }
}

#[test]
fn probe_benchmark_pipeline() {
    let family = make_four_room_family(&benchmark_four_room_specs(24)).unwrap();
    let mut truth = family.hierarchy().all_exits();
    truth.sort_unstable();
    println!("truth: {truth:?}");
    for (t, task) in family.tasks().iter().enumerate() {
        let (vt, _) = value_iteration(task, None).unwrap();
        println!("task {t}: V* = {}", vt.root_value(task.start_state()));
    }
    let cfg = bench_cfg();
    let start = Instant::now();
    let mut rng = child_rng(41, &[0]);
    let out = run_exit_discovery(&family, &cfg, &mut rng).unwrap();
    let phased_time = start.elapsed();
    let mut found = out.state.exits.flagged_pairs();
    found.sort_unstable();
    println!(
        "phased: found {found:?}\n  match {}  time {phased_time:.2?}  steps p1 {} p2 {} p3 {} total {}",
        found == truth,
        out.state.counters.phase1.total(),
        out.state.counters.phase2.total(),
        out.state.counters.phase3.total(),
        out.state.counters.total()
    );
    println!("  value estimates: {:?}", out.state.value_estimates);

    let start = Instant::now();
    let mut rng = child_rng(41, &[1]);
    let (brute_exits, brute_counter) = brute_force_hierarchy(&family, &cfg, &mut rng).unwrap();
    let brute_time = start.elapsed();
    let mut brute_found = brute_exits.flagged_pairs();
    brute_found.sort_unstable();
    println!(
        "brute: found {brute_found:?}\n  match {}  time {brute_time:.2?}  steps {}",
        brute_found == truth,
        brute_counter.total()
    );
}
