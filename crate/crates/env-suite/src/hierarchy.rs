//! Cluster structure over a state space: a partition into clusters, each with
//! designated entrance states and exit pairs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use mdp_core::textio::parse_usize;

use crate::error::EnvError;

/// A partition of the state space into clusters, with per-cluster entrance
/// states and exit `(state, action)` pairs.
///
/// Exits are the only pairs whose dynamics may vary across tasks; entrances
/// are the only states exits may land on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentHierarchy {
    num_states: usize,
    num_actions: usize,
    /// `cluster_of[s]` = index of the cluster containing `s`.
    cluster_of: Vec<usize>,
    /// Cluster membership lists, sorted ascending.
    clusters: Vec<Vec<usize>>,
    /// Per-cluster entrance states, sorted ascending.
    entrances: Vec<Vec<usize>>,
    /// Per-cluster exit pairs, sorted ascending.
    exits: Vec<Vec<(usize, usize)>>,
}

impl LatentHierarchy {
    /// Builds and checks a hierarchy from per-cluster membership lists.
    ///
    /// # Errors
    /// Rejects lists that fail to partition `0..num_states`, entrances
    /// outside their cluster, exits whose state lies outside their cluster,
    /// and out-of-range actions.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        clusters: Vec<Vec<usize>>,
        entrances: Vec<Vec<usize>>,
        exits: Vec<Vec<(usize, usize)>>,
    ) -> Result<Self, EnvError> {
        if entrances.len() != clusters.len() || exits.len() != clusters.len() {
            return Err(EnvError::BadHierarchy(format!(
                "{} clusters but {} entrance lists and {} exit lists",
                clusters.len(),
                entrances.len(),
                exits.len()
            )));
        }
        let mut cluster_of = vec![usize::MAX; num_states];
        for (c, members) in clusters.iter().enumerate() {
            for &s in members {
                if s >= num_states {
                    return Err(EnvError::BadHierarchy(format!("cluster {c} contains out-of-range state {s}")));
                }
                if cluster_of[s] != usize::MAX {
                    return Err(EnvError::BadHierarchy(format!(
                        "state {s} appears in clusters {} and {c}",
                        cluster_of[s]
                    )));
                }
                cluster_of[s] = c;
            }
        }
        if let Some(s) = cluster_of.iter().position(|&c| c == usize::MAX) {
            return Err(EnvError::BadHierarchy(format!("state {s} belongs to no cluster")));
        }
        for (c, list) in entrances.iter().enumerate() {
            for &s in list {
                if s >= num_states || cluster_of[s] != c {
                    return Err(EnvError::BadHierarchy(format!("entrance {s} does not lie in cluster {c}")));
                }
            }
        }
        for (c, list) in exits.iter().enumerate() {
            for &(s, a) in list {
                if s >= num_states || cluster_of[s] != c {
                    return Err(EnvError::BadHierarchy(format!("exit state {s} does not lie in cluster {c}")));
                }
                if a >= num_actions {
                    return Err(EnvError::BadHierarchy(format!("exit ({s}, {a}) has out-of-range action")));
                }
            }
        }
        let mut clusters = clusters;
        let mut entrances = entrances;
        let mut exits = exits;
        for list in &mut clusters {
            list.sort_unstable();
        }
        for list in &mut entrances {
            list.sort_unstable();
            list.dedup();
        }
        for list in &mut exits {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { num_states, num_actions, cluster_of, clusters, entrances, exits })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Index of the cluster containing `s`.
    pub fn cluster_of(&self, s: usize) -> usize {
        self.cluster_of[s]
    }

    /// Sorted members of cluster `c`.
    pub fn cluster(&self, c: usize) -> &[usize] {
        &self.clusters[c]
    }

    /// Sorted entrance states of cluster `c`.
    pub fn entrances(&self, c: usize) -> &[usize] {
        &self.entrances[c]
    }

    /// Sorted exit pairs of cluster `c`.
    pub fn exits(&self, c: usize) -> &[(usize, usize)] {
        &self.exits[c]
    }

    /// All exit pairs across clusters, sorted ascending.
    pub fn all_exits(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self.exits.iter().flatten().copied().collect();
        out.sort_unstable();
        out
    }

    /// All entrance states across clusters, sorted and deduplicated.
    pub fn all_entrances(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.entrances.iter().flatten().copied().collect();
        set.into_iter().collect()
    }

    /// Whether `(s, a)` is an exit of the cluster containing `s`.
    pub fn is_exit(&self, s: usize, a: usize) -> bool {
        self.exits[self.cluster_of[s]].binary_search(&(s, a)).is_ok()
    }

    /// Whether `s` is an entrance of its own cluster.
    pub fn is_entrance(&self, s: usize) -> bool {
        self.entrances[self.cluster_of[s]].binary_search(&s).is_ok()
    }

    /// Total number of exit pairs.
    pub fn total_exits(&self) -> usize {
        self.exits.iter().map(Vec::len).sum()
    }

    /// Total number of entrance states.
    pub fn total_entrances(&self) -> usize {
        self.entrances.iter().map(Vec::len).sum()
    }

    /// Largest per-cluster exit count.
    pub fn max_exits_per_cluster(&self) -> usize {
        self.exits.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Plain-text serialization, parseable by [`hierarchy_from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "latent-hierarchy v1");
        let _ = writeln!(out, "dims {} {} {}", self.num_states, self.num_actions, self.clusters.len());
        for c in 0..self.clusters.len() {
            let _ = write!(out, "cluster {} {}", c, self.clusters[c].len());
            for s in &self.clusters[c] {
                let _ = write!(out, " {s}");
            }
            out.push('\n');
            let _ = write!(out, "entrances {} {}", c, self.entrances[c].len());
            for s in &self.entrances[c] {
                let _ = write!(out, " {s}");
            }
            out.push('\n');
            let _ = write!(out, "exits {} {}", c, self.exits[c].len());
            for (s, a) in &self.exits[c] {
                let _ = write!(out, " {s} {a}");
            }
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }
}

/// Parses the output of [`LatentHierarchy::to_text`].
///
/// # Errors
/// Reports the first malformed line.
pub fn hierarchy_from_text(text: &str) -> Result<LatentHierarchy, EnvError> {
    let bad = |line: usize, message: &str| EnvError::Config { line, message: message.to_string() };
    let mut lines = text.lines().enumerate();
    let (n, header) = lines.next().ok_or_else(|| bad(1, "empty input"))?;
    if header.trim() != "latent-hierarchy v1" {
        return Err(bad(n + 1, "expected header `latent-hierarchy v1`"));
    }
    let (n, dims) = lines.next().ok_or_else(|| bad(2, "missing dims line"))?;
    let toks: Vec<&str> = dims.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "dims" {
        return Err(bad(n + 1, "expected `dims S A C`"));
    }
    let num_states = parse_usize(toks[1], n + 1)?;
    let num_actions = parse_usize(toks[2], n + 1)?;
    let num_clusters = parse_usize(toks[3], n + 1)?;
    let mut clusters = vec![Vec::new(); num_clusters];
    let mut entrances = vec![Vec::new(); num_clusters];
    let mut exits = vec![Vec::new(); num_clusters];
    for c in 0..num_clusters {
        for kind in ["cluster", "entrances", "exits"] {
            let (n, line) = lines
                .next()
                .ok_or_else(|| bad(0, "unexpected end of input"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < 3 || toks[0] != kind {
                return Err(bad(n + 1, &format!("expected `{kind} <cluster> <count> ...`")));
            }
            let c_read = parse_usize(toks[1], n + 1)?;
            if c_read != c {
                return Err(bad(n + 1, &format!("expected cluster {c}, found {c_read}")));
            }
            let count = parse_usize(toks[2], n + 1)?;
            let rest = &toks[3..];
            match kind {
                "exits" => {
                    if rest.len() != 2 * count {
                        return Err(bad(n + 1, "exit token count does not match declared count"));
                    }
                    for pair in rest.chunks(2) {
                        exits[c].push((parse_usize(pair[0], n + 1)?, parse_usize(pair[1], n + 1)?));
                    }
                }
                _ => {
                    if rest.len() != count {
                        return Err(bad(n + 1, "state token count does not match declared count"));
                    }
                    let dst = if kind == "cluster" { &mut clusters[c] } else { &mut entrances[c] };
                    for tok in rest {
                        dst.push(parse_usize(tok, n + 1)?);
                    }
                }
            }
        }
    }
    match lines.next() {
        Some((_, line)) if line.trim() == "end" => {}
        Some((n, _)) => return Err(bad(n + 1, "expected `end`")),
        None => return Err(bad(0, "missing `end` line")),
    }
    LatentHierarchy::new(num_states, num_actions, clusters, entrances, exits)
}
