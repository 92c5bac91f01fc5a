//! Plain-text `key = value` specs for the environment generators: one flat
//! namespace, `#` comments, decimal numbers, no nesting.

use mdp_core::TabularMDP;

use crate::binary_tree::{make_binary_tree_family, make_binary_tree_mdp, BinaryTreeSpec, TreeVariant};
use crate::counterexample::{make_counterexample_env, CounterexampleKind};
use crate::error::EnvError;
use crate::family::TaskFamily;
use crate::four_room::{make_four_room_family, FourRoomSpec};
use crate::hierarchy::LatentHierarchy;

/// Parsed family spec, ready to build.
#[derive(Debug, Clone)]
pub enum FamilyConfig {
    FourRoom { specs: Vec<FourRoomSpec> },
    BinaryTree { spec: BinaryTreeSpec, variant: TreeChoice },
    Counterexample { kind: CounterexampleKind },
}

/// Which binary-tree construction to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeChoice {
    /// Two-task family differing in the rewarded gate action.
    Family,
    /// Single task with terminal success/failure states.
    Full,
    /// Single task with the gate made absorbing.
    Reduced,
}

/// A built environment: either a multi-task family or a single task with its
/// declared hierarchy.
#[derive(Debug, Clone)]
pub enum BuiltEnv {
    Family(TaskFamily),
    Single { mdp: TabularMDP, hierarchy: LatentHierarchy },
}

impl BuiltEnv {
    pub fn family(&self) -> Option<&TaskFamily> {
        match self {
            BuiltEnv::Family(f) => Some(f),
            BuiltEnv::Single { .. } => None,
        }
    }
}

/// One `key = value` entry with its source line for error reporting.
struct Entries {
    items: Vec<(String, String, usize, bool)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, EnvError> {
        let mut items = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let body = body.trim();
            if body.is_empty() {
                continue;
            }
            let Some(eq) = body.find('=') else {
                return Err(EnvError::Config { line, message: format!("expected `key = value`, got `{body}`") });
            };
            let key = body[..eq].trim().to_string();
            let value = body[eq + 1..].trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(EnvError::Config { line, message: "empty key or value".to_string() });
            }
            items.push((key, value, line, false));
        }
        Ok(Self { items })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        for item in &mut self.items {
            if item.0 == key && !item.3 {
                item.3 = true;
                return Some((item.1.clone(), item.2));
            }
        }
        None
    }

    fn require(&mut self, key: &str) -> Result<(String, usize), EnvError> {
        self.take(key).ok_or_else(|| EnvError::Config { line: 0, message: format!("missing key `{key}`") })
    }

    fn require_usize(&mut self, key: &str) -> Result<usize, EnvError> {
        let (v, line) = self.require(key)?;
        v.parse().map_err(|_| EnvError::Config { line, message: format!("`{key}` must be a nonnegative integer") })
    }

    fn take_usize(&mut self, key: &str, default: usize) -> Result<usize, EnvError> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| EnvError::Config { line, message: format!("`{key}` must be a nonnegative integer") }),
        }
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64, EnvError> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => {
                v.parse().map_err(|_| EnvError::Config { line, message: format!("`{key}` must be a number") })
            }
        }
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool, EnvError> {
        match self.take(key) {
            None => Ok(default),
            Some((v, line)) => match v.as_str() {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                other => {
                    Err(EnvError::Config { line, message: format!("`{key}` must be true or false, got `{other}`") })
                }
            },
        }
    }

    /// Errors on the first unconsumed key, so typos never pass silently.
    fn finish(self) -> Result<(), EnvError> {
        for (key, _, line, used) in self.items {
            if !used {
                return Err(EnvError::Config { line, message: format!("unknown key `{key}`") });
            }
        }
        Ok(())
    }
}

fn parse_cell(value: &str, line: usize, key: &str) -> Result<(usize, usize), EnvError> {
    let err = || EnvError::Config { line, message: format!("`{key}` must be `row,col`") };
    let (r, c) = value.split_once(',').ok_or_else(err)?;
    let row = r.trim().parse().map_err(|_| err())?;
    let col = c.trim().parse().map_err(|_| err())?;
    Ok((row, col))
}

fn parse_gates(value: &str, line: usize, key: &str) -> Result<[bool; 4], EnvError> {
    let bits: Vec<char> = value.chars().collect();
    if bits.len() != 4 || bits.iter().any(|&c| c != '0' && c != '1') {
        return Err(EnvError::Config {
            line,
            message: format!("`{key}` must be four 0/1 digits (gate order A→B, B→D, D→C, C→A)"),
        });
    }
    Ok([bits[0] == '1', bits[1] == '1', bits[2] == '1', bits[3] == '1'])
}

fn parse_bits(value: &str, line: usize, key: &str) -> Result<Vec<u8>, EnvError> {
    value
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(EnvError::Config { line, message: format!("`{key}` must be a 0/1 string") }),
        })
        .collect()
}

impl FamilyConfig {
    /// Parses a flat `key = value` spec. The `kind` key selects the
    /// generator; every other key must belong to that generator.
    ///
    /// # Errors
    /// Reports the offending line for malformed entries, unknown keys, and
    /// out-of-range values.
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let mut entries = Entries::parse(text)?;
        let (kind, kind_line) = entries.require("kind")?;
        let parsed = match kind.as_str() {
            "four-room" => parse_four_room(&mut entries)?,
            "binary-tree" => parse_binary_tree(&mut entries)?,
            "counterexample" => parse_counterexample(&mut entries)?,
            other => {
                return Err(EnvError::Config {
                    line: kind_line,
                    message: format!("unknown kind `{other}` (want four-room, binary-tree, or counterexample)"),
                })
            }
        };
        entries.finish()?;
        Ok(parsed)
    }

    /// Instantiates the configured environment.
    ///
    /// # Errors
    /// Propagates generator failures (bad geometry, never-varying exits,
    /// out-of-range parameters).
    pub fn build(&self) -> Result<BuiltEnv, EnvError> {
        match self {
            FamilyConfig::FourRoom { specs } => Ok(BuiltEnv::Family(make_four_room_family(specs)?)),
            FamilyConfig::BinaryTree { spec, variant } => match variant {
                TreeChoice::Family => Ok(BuiltEnv::Family(make_binary_tree_family(spec)?)),
                TreeChoice::Full => {
                    let (mdp, hierarchy) = make_binary_tree_mdp(spec, TreeVariant::Full)?;
                    Ok(BuiltEnv::Single { mdp, hierarchy })
                }
                TreeChoice::Reduced => {
                    let (mdp, hierarchy) = make_binary_tree_mdp(spec, TreeVariant::Reduced)?;
                    Ok(BuiltEnv::Single { mdp, hierarchy })
                }
            },
            FamilyConfig::Counterexample { kind } => {
                let (mdp, hierarchy) = make_counterexample_env(*kind)?;
                Ok(BuiltEnv::Single { mdp, hierarchy })
            }
        }
    }
}

fn parse_four_room(entries: &mut Entries) -> Result<FamilyConfig, EnvError> {
    let side = entries.require_usize("side")?;
    let horizon = entries.require_usize("horizon")?;
    let slip = entries.take_f64("slip", 0.0)?;
    let dummy_start = entries.take_bool("dummy_start", true)?;
    let tasks = entries.require_usize("tasks")?;
    let mut specs = Vec::with_capacity(tasks);
    for i in 0..tasks {
        let gates_key = format!("task{i}.gates");
        let (gates_raw, gates_line) = entries.require(&gates_key)?;
        let start_key = format!("task{i}.start");
        let (start_raw, start_line) = entries.require(&start_key)?;
        let goal_key = format!("task{i}.goal");
        let (goal_raw, goal_line) = entries.require(&goal_key)?;
        specs.push(FourRoomSpec {
            side,
            horizon,
            slip,
            dummy_start,
            gates_open: parse_gates(&gates_raw, gates_line, &gates_key)?,
            start_cell: parse_cell(&start_raw, start_line, &start_key)?,
            goal_cell: parse_cell(&goal_raw, goal_line, &goal_key)?,
        });
    }
    Ok(FamilyConfig::FourRoom { specs })
}

fn parse_binary_tree(entries: &mut Entries) -> Result<FamilyConfig, EnvError> {
    let depth = entries.require_usize("depth")?;
    let horizon = entries.require_usize("horizon")?;
    let bonus = entries.take_f64("bonus", 0.1)?;
    let (leaf_raw, leaf_line) = entries.require("target_leaf")?;
    let target_leaf = parse_bits(&leaf_raw, leaf_line, "target_leaf")?;
    let target_action = entries.take_usize("target_action", 0)?;
    let gate_exit = entries.take_usize("gate_exit", 0)?;
    let (variant_raw, variant_line) = entries.require("variant")?;
    let variant = match variant_raw.as_str() {
        "family" => TreeChoice::Family,
        "full" => TreeChoice::Full,
        "reduced" => TreeChoice::Reduced,
        other => {
            return Err(EnvError::Config {
                line: variant_line,
                message: format!("unknown variant `{other}` (want family, full, or reduced)"),
            })
        }
    };
    let spec = BinaryTreeSpec { depth, target_leaf, target_action, gate_exit, bonus, horizon };
    Ok(FamilyConfig::BinaryTree { spec, variant })
}

fn parse_counterexample(entries: &mut Entries) -> Result<FamilyConfig, EnvError> {
    let (shape, shape_line) = entries.require("shape")?;
    let kind = match shape.as_str() {
        "chain" => CounterexampleKind::HighVarianceChain { chain_len: entries.require_usize("chain_len")? },
        "two-arm" => CounterexampleKind::TwoArmRoom { horizon: entries.require_usize("horizon")? },
        other => {
            return Err(EnvError::Config {
                line: shape_line,
                message: format!("unknown shape `{other}` (want chain or two-arm)"),
            })
        }
    };
    Ok(FamilyConfig::Counterexample { kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::four_room::benchmark_four_room_specs;

    #[test]
    fn four_room_config_builds_the_benchmark_family() {
        let text = "\
# six-task gated grid
kind = four-room
side = 8
horizon = 24
tasks = 6
task0.gates = 1111
task0.start = 0,0
task0.goal = 7,7
task1.gates = 0111
task1.start = 0,0
task1.goal = 0,7
task2.gates = 1011
task2.start = 0,7
task2.goal = 7,7
task3.gates = 1101
task3.start = 7,7
task3.goal = 7,0
task4.gates = 1110
task4.start = 7,0
task4.goal = 0,0
task5.gates = 1111
task5.start = 7,7
task5.goal = 0,7
";
        let config = FamilyConfig::parse(text).unwrap();
        let built = config.build().unwrap();
        let fam = built.family().expect("four-room builds a family");
        let reference = make_four_room_family(&benchmark_four_room_specs(24)).unwrap();
        assert_eq!(fam.num_tasks(), reference.num_tasks());
        for (a, b) in fam.tasks().iter().zip(reference.tasks()) {
            let (ta, tb) =
                (mdp_core::textio::mdp_to_text(a).unwrap(), mdp_core::textio::mdp_to_text(b).unwrap());
            assert_eq!(ta, tb, "configured family must match the generator");
        }
    }

    #[test]
    fn binary_tree_config_round_trips_both_variants() {
        let base = "kind = binary-tree\ndepth = 3\nhorizon = 12\nbonus = 0.1\ntarget_leaf = 01\ntarget_action = 1\n";
        let fam_cfg = FamilyConfig::parse(&format!("{base}variant = family\n")).unwrap();
        match fam_cfg.build().unwrap() {
            BuiltEnv::Family(f) => assert_eq!(f.num_tasks(), 2),
            BuiltEnv::Single { .. } => panic!("family variant must build two tasks"),
        }
        let reduced = FamilyConfig::parse(&format!("{base}variant = reduced\n")).unwrap();
        match reduced.build().unwrap() {
            BuiltEnv::Single { mdp, hierarchy } => {
                assert_eq!(mdp.num_states(), (1 << 3) + 2);
                assert_eq!(hierarchy.total_exits(), 0);
            }
            BuiltEnv::Family(_) => panic!("reduced variant is a single task"),
        }
    }

    #[test]
    fn counterexample_config_selects_shapes() {
        let chain = FamilyConfig::parse("kind = counterexample\nshape = chain\nchain_len = 4\n").unwrap();
        match chain.build().unwrap() {
            BuiltEnv::Single { mdp, .. } => assert_eq!(mdp.horizon(), 6),
            BuiltEnv::Family(_) => panic!(),
        }
        let arm = FamilyConfig::parse("kind = counterexample\nshape = two-arm\nhorizon = 8\n").unwrap();
        match arm.build().unwrap() {
            BuiltEnv::Single { mdp, .. } => assert_eq!(mdp.num_states(), 12),
            BuiltEnv::Family(_) => panic!(),
        }
    }

    #[test]
    fn unknown_keys_and_malformed_lines_report_their_line() {
        let err = FamilyConfig::parse("kind = four-room\nwat\n").unwrap_err();
        assert!(matches!(err, EnvError::Config { line: 2, .. }), "got {err}");
        let err = FamilyConfig::parse(
            "kind = counterexample\nshape = chain\nchain_len = 4\nmystery = 1\n",
        )
        .unwrap_err();
        assert!(matches!(err, EnvError::Config { line: 4, .. }), "got {err}");
        let err = FamilyConfig::parse("kind = nope\n").unwrap_err();
        assert!(matches!(err, EnvError::Config { line: 1, .. }), "got {err}");
    }

    #[test]
    fn cell_and_gate_values_are_checked() {
        let bad_cell = "kind = four-room\nside = 8\nhorizon = 10\ntasks = 1\ntask0.gates = 1111\ntask0.start = 3\ntask0.goal = 0,0\n";
        assert!(FamilyConfig::parse(bad_cell).is_err());
        let bad_gates = "kind = four-room\nside = 8\nhorizon = 10\ntasks = 1\ntask0.gates = 11\ntask0.start = 0,0\ntask0.goal = 0,0\n";
        assert!(FamilyConfig::parse(bad_gates).is_err());
    }
}
