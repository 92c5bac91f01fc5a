//! Pipeline state that survives between phases, with a text format so each
//! phase can run as a separate process invocation.

use mdp_core::textio::{format_f64, parse_f64, parse_usize};
use mdp_core::{DynamicsTable, EmpiricalModel, QueryCounter};

use crate::error::MetaTrainError;
use crate::exits::ExitTable;

/// Interaction totals attributed to each phase.
#[derive(Debug, Clone, Default)]
pub struct PhaseCounters {
    pub phase1: QueryCounter,
    pub phase2: QueryCounter,
    pub phase3: QueryCounter,
}

impl PhaseCounters {
    /// Environment steps across all phases.
    pub fn total(&self) -> u64 {
        self.phase1.total() + self.phase2.total() + self.phase3.total()
    }
}

/// Everything the detection loop needs from the earlier phases: per-task
/// transition counts and value estimates, the reference counts, the exit
/// table, and the quiet-task counter.
#[derive(Debug, Clone)]
pub struct MetaTrainState {
    num_tasks: usize,
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    /// Raw per-task transition counts (estimates are derived on demand).
    pub task_models: Vec<EmpiricalModel>,
    /// Mean-return estimate of each task's optimal value.
    pub value_estimates: Vec<f64>,
    /// Raw reference counts from the reward-free phase.
    pub reference: EmpiricalModel,
    /// Detected exits and their learned per-task rows.
    pub exits: ExitTable,
    /// Consecutive task visits without a new exit; resets on every find.
    pub tasks_since_exit: usize,
    /// Interaction totals per phase.
    pub counters: PhaseCounters,
}

impl MetaTrainState {
    pub fn new(num_tasks: usize, num_states: usize, num_actions: usize, horizon: usize) -> Self {
        Self {
            num_tasks,
            num_states,
            num_actions,
            horizon,
            task_models: vec![EmpiricalModel::new(num_states, num_actions); num_tasks],
            value_estimates: vec![0.0; num_tasks],
            reference: EmpiricalModel::new(num_states, num_actions),
            exits: ExitTable::new(num_tasks, num_states, num_actions),
            tasks_since_exit: 0,
            counters: PhaseCounters::default(),
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Task `t`'s thresholded model.
    pub fn task_table(&self, t: usize, threshold: u64) -> DynamicsTable {
        self.task_models[t].estimate(threshold)
    }

    /// The reference model; any observed row counts.
    pub fn reference_table(&self) -> DynamicsTable {
        self.reference.estimate(1)
    }

    /// Serializes counts and estimates; floats round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::from("meta-train-state v1\n");
        out.push_str(&format!(
            "dims {} {} {} {}\n",
            self.num_tasks, self.num_states, self.num_actions, self.horizon
        ));
        let values: Vec<String> = self.value_estimates.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&format!("values {}\n", values.join(" ")));
        out.push_str(&format!("since {}\n", self.tasks_since_exit));
        out.push_str(&format!(
            "queries {} {} {}\n",
            self.counters.phase1.total(),
            self.counters.phase2.total(),
            self.counters.phase3.total()
        ));
        let push_counts = |label: usize, model: &EmpiricalModel, out: &mut String| {
            for s in 0..self.num_states {
                for a in 0..self.num_actions {
                    for s2 in 0..self.num_states {
                        let n = model.count_triple(s, a, s2);
                        if n > 0 {
                            out.push_str(&format!("triple {label} {s} {a} {s2} {n}\n"));
                        }
                    }
                }
            }
        };
        push_counts(0, &self.reference, &mut out);
        for (t, model) in self.task_models.iter().enumerate() {
            push_counts(t + 1, model, &mut out);
        }
        for (s, a) in self.exits.flagged_pairs() {
            out.push_str(&format!("exit {s} {a}\n"));
            for t in 0..self.num_tasks {
                let row = self.exits.task_row(t, s, a);
                if row.iter().any(|&p| p != 0.0) {
                    let cells: Vec<String> = row.iter().map(|&p| format_f64(p)).collect();
                    out.push_str(&format!("exitrow {t} {s} {a} {}\n", cells.join(" ")));
                }
            }
        }
        out.push_str("end\n");
        out
    }

    /// Parses the text format produced by [`MetaTrainState::to_text`].
    ///
    /// # Errors
    /// Reports the first malformed line with its line number.
    pub fn from_text(text: &str) -> Result<Self, MetaTrainError> {
        let fail = |line: usize, message: &str| MetaTrainError::Text { line, message: message.to_string() };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| fail(1, "empty input"))?;
        if header.trim() != "meta-train-state v1" {
            return Err(fail(1, "expected header 'meta-train-state v1'"));
        }
        let mut state: Option<MetaTrainState> = None;
        let mut saw_end = false;
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let keyword = tokens.next().unwrap_or_default();
            let rest: Vec<&str> = tokens.collect();
            match keyword {
                "dims" => {
                    if rest.len() != 4 {
                        return Err(fail(line_no, "dims needs 4 fields"));
                    }
                    let t = parse_usize(rest[0], line_no)?;
                    let s = parse_usize(rest[1], line_no)?;
                    let a = parse_usize(rest[2], line_no)?;
                    let h = parse_usize(rest[3], line_no)?;
                    if t == 0 || s == 0 || a == 0 || h == 0 {
                        return Err(fail(line_no, "dims must be positive"));
                    }
                    state = Some(MetaTrainState::new(t, s, a, h));
                }
                _ if state.is_none() => return Err(fail(line_no, "dims must come first")),
                "values" => {
                    let st = state.as_mut().unwrap();
                    if rest.len() != st.num_tasks {
                        return Err(fail(line_no, "values needs one entry per task"));
                    }
                    for (t, token) in rest.iter().enumerate() {
                        st.value_estimates[t] = parse_f64(token, line_no)?;
                    }
                }
                "since" => {
                    let st = state.as_mut().unwrap();
                    if rest.len() != 1 {
                        return Err(fail(line_no, "since needs one field"));
                    }
                    st.tasks_since_exit = parse_usize(rest[0], line_no)?;
                }
                "queries" => {
                    let st = state.as_mut().unwrap();
                    if rest.len() != 3 {
                        return Err(fail(line_no, "queries needs three fields"));
                    }
                    let mut counters = PhaseCounters::default();
                    counters.phase1.record_steps(parse_usize(rest[0], line_no)? as u64);
                    counters.phase2.record_steps(parse_usize(rest[1], line_no)? as u64);
                    counters.phase3.record_steps(parse_usize(rest[2], line_no)? as u64);
                    st.counters = counters;
                }
                "triple" => {
                    let st = state.as_mut().unwrap();
                    if rest.len() != 5 {
                        return Err(fail(line_no, "triple needs five fields"));
                    }
                    let label = parse_usize(rest[0], line_no)?;
                    let s = parse_usize(rest[1], line_no)?;
                    let a = parse_usize(rest[2], line_no)?;
                    let s2 = parse_usize(rest[3], line_no)?;
                    let n = parse_usize(rest[4], line_no)? as u64;
                    if label > st.num_tasks || s >= st.num_states || a >= st.num_actions || s2 >= st.num_states
                    {
                        return Err(fail(line_no, "triple indices out of range"));
                    }
                    let model =
                        if label == 0 { &mut st.reference } else { &mut st.task_models[label - 1] };
                    model.record_n(s, a, s2, n);
                }
                "exit" => {
                    let st = state.as_mut().unwrap();
                    if rest.len() != 2 {
                        return Err(fail(line_no, "exit needs two fields"));
                    }
                    let s = parse_usize(rest[0], line_no)?;
                    let a = parse_usize(rest[1], line_no)?;
                    if s >= st.num_states || a >= st.num_actions {
                        return Err(fail(line_no, "exit pair out of range"));
                    }
                    st.exits.flag(s, a);
                }
                "exitrow" => {
                    let st = state.as_mut().unwrap();
                    if rest.len() != 3 + st.num_states {
                        return Err(fail(line_no, "exitrow needs task, pair, and one entry per state"));
                    }
                    let t = parse_usize(rest[0], line_no)?;
                    let s = parse_usize(rest[1], line_no)?;
                    let a = parse_usize(rest[2], line_no)?;
                    if t >= st.num_tasks {
                        return Err(fail(line_no, "exitrow task out of range"));
                    }
                    let mut row = Vec::with_capacity(st.num_states);
                    for token in &rest[3..] {
                        row.push(parse_f64(token, line_no)?);
                    }
                    st.exits
                        .set_task_row(t, s, a, &row)
                        .map_err(|e| fail(line_no, &e.to_string()))?;
                }
                "end" => {
                    saw_end = true;
                    break;
                }
                other => return Err(fail(line_no, &format!("unknown keyword '{other}'"))),
            }
        }
        if !saw_end {
            return Err(fail(text.lines().count(), "missing 'end' line"));
        }
        state.ok_or_else(|| fail(1, "missing dims"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn populated_state() -> MetaTrainState {
        let mut state = MetaTrainState::new(2, 3, 2, 5);
        state.task_models[0].record_n(0, 1, 2, 7);
        state.task_models[1].record_n(2, 0, 0, 3);
        state.reference.record_n(1, 1, 1, 11);
        state.value_estimates = vec![1.25, 0.6000000000000001];
        state.tasks_since_exit = 1;
        state.counters.phase1.record_steps(100);
        state.counters.phase2.record_steps(250);
        state.counters.phase3.record_steps(42);
        state.exits.flag(0, 1);
        state.exits.set_task_row(0, 0, 1, &[0.0, 1.0, 0.0]).unwrap();
        state.exits.set_task_row(1, 0, 1, &[0.0, 0.0, 1.0]).unwrap();
        state
    }

    #[test]
    fn text_round_trip_preserves_everything() {
        let state = populated_state();
        let text = state.to_text();
        let back = MetaTrainState::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text, "serialization must be a fixed point");
        assert_eq!(back.value_estimates, state.value_estimates);
        assert_eq!(back.task_models[0].count_triple(0, 1, 2), 7);
        assert_eq!(back.reference.count(1, 1), 11);
        assert_eq!(back.counters.phase2.total(), 250);
        assert_eq!(back.tasks_since_exit, 1);
        assert!(back.exits.is_exit(0, 1));
        assert_eq!(back.exits.task_row(1, 0, 1), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn estimates_are_rederived_from_counts() {
        let state = populated_state();
        let back = MetaTrainState::from_text(&state.to_text()).unwrap();
        let table = back.task_table(0, 5);
        assert_eq!(table.row(0, 1), &[0.0, 0.0, 1.0], "7 observations of one target");
        assert!(!back.task_table(1, 5).is_known(2, 0), "3 observations stay under threshold 5");
        assert!(back.reference_table().is_known(1, 1));
    }

    #[test]
    fn malformed_lines_report_their_numbers() {
        let cases = [
            ("meta-train-state v2\nend\n", 1),
            ("meta-train-state v1\nvalues 1.0\nend\n", 2),
            ("meta-train-state v1\ndims 2 3 2 5\ntriple 9 0 0 0 1\nend\n", 3),
            ("meta-train-state v1\ndims 2 3 2 5\nwhatever\nend\n", 3),
            ("meta-train-state v1\ndims 2 3 2 5\n", 2),
        ];
        for (text, want_line) in cases {
            match MetaTrainState::from_text(text) {
                Err(MetaTrainError::Text { line, .. }) => {
                    assert_eq!(line, want_line, "wrong line for {text:?}")
                }
                other => panic!("expected text error for {text:?}, got {other:?}"),
            }
        }
    }
}
