//! Text serialization must round-trip random instances bit-exactly, both
//! through strings and through files.

use mdp_core::gen::{random_mdp, RandomMdpConfig};
use mdp_core::textio::{load_mdp, mdp_from_text, mdp_to_text, save_mdp};
use mdp_core::child_rng;

#[test]
fn random_instances_round_trip_bit_exactly_through_text() {
    for seed in 0..40u64 {
        let mut rng = child_rng(8300 + seed, &[]);
        let cfg = RandomMdpConfig::new(6, 3, 5);
        let mdp = random_mdp(&cfg, &mut rng);
        let text = mdp_to_text(&mdp).unwrap();
        let reparsed = mdp_from_text(&text).unwrap();
        for s in 0..mdp.num_states() {
            for a in 0..mdp.num_actions() {
                assert_eq!(
                    mdp.reward(s, a).to_bits(),
                    reparsed.reward(s, a).to_bits(),
                    "seed {seed}: reward bits at ({s},{a})"
                );
                let lhs = mdp.stationary_row(s, a);
                let rhs = reparsed.stationary_row(s, a);
                for (i, (x, y)) in lhs.iter().zip(rhs.iter()).enumerate() {
                    assert_eq!(x.to_bits(), y.to_bits(), "seed {seed}: row bits at ({s},{a},{i})");
                }
            }
        }
        let text_again = mdp_to_text(&reparsed).unwrap();
        assert_eq!(text, text_again, "seed {seed}: second serialization must be byte-identical");
    }
}

#[test]
fn file_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = child_rng(8400, &[]);
    let cfg = RandomMdpConfig::new(5, 2, 4);
    let mdp = random_mdp(&cfg, &mut rng);
    let path_a = dir.path().join("a.mdp");
    let path_b = dir.path().join("b.mdp");
    save_mdp(&path_a, &mdp).unwrap();
    let loaded = load_mdp(&path_a).unwrap();
    save_mdp(&path_b, &loaded).unwrap();
    let bytes_a = std::fs::read(&path_a).unwrap();
    let bytes_b = std::fs::read(&path_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "files must be byte-identical after a load/save cycle");
}
