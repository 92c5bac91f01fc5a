//! Plain-text MDP serialization.
//!
//! Format (one token stream per line, space-separated):
//!
//! ```text
//! tabular-mdp v1
//! dims <S> <A> <H> <start>
//! row <s> <a> <reward> <p_0> ... <p_{S-1}>   (S·A lines, (s,a) in lexicographic order)
//! end
//! ```
//!
//! Floats are printed with 17 significant decimal digits, which round-trips
//! IEEE-754 doubles exactly; stored rows sum to exactly 1.0 (construction
//! guarantees it), so write → read → write is byte-identical.

use std::fs;
use std::path::Path;

use crate::error::MdpError;
use crate::mdp::TabularMDP;

/// Prints a double with 17 significant digits (bit-exact round trip).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a double written by [`format_f64`] (or any standard float literal).
pub fn parse_f64(token: &str, line: usize) -> Result<f64, MdpError> {
    token.parse::<f64>().map_err(|_| MdpError::Parse { line, message: format!("bad float {token:?}") })
}

/// Parses an unsigned integer token.
pub fn parse_usize(token: &str, line: usize) -> Result<usize, MdpError> {
    token.parse::<usize>().map_err(|_| MdpError::Parse { line, message: format!("bad integer {token:?}") })
}

/// Serializes a stationary MDP to the text format.
///
/// # Errors
/// Per-step dynamics have no text form.
pub fn mdp_to_text(mdp: &TabularMDP) -> Result<String, MdpError> {
    if mdp.is_per_step() {
        return Err(MdpError::DimensionMismatch {
            left: "per-step MDP",
            right: "text format",
            detail: "only stationary dynamics serialize".to_string(),
        });
    }
    let mut out = String::new();
    out.push_str("tabular-mdp v1\n");
    out.push_str(&format!("dims {} {} {} {}\n", mdp.num_states(), mdp.num_actions(), mdp.horizon(), mdp.start_state()));
    for s in 0..mdp.num_states() {
        for a in 0..mdp.num_actions() {
            out.push_str(&format!("row {s} {a} {}", format_f64(mdp.reward(s, a))));
            for &p in mdp.stationary_row(s, a) {
                out.push(' ');
                out.push_str(&format_f64(p));
            }
            out.push('\n');
        }
    }
    out.push_str("end\n");
    Ok(out)
}

/// Parses the text format back into an MDP.
pub fn mdp_from_text(text: &str) -> Result<TabularMDP, MdpError> {
    let mut lines = text.lines().enumerate();
    let expect_line = |entry: Option<(usize, &str)>, what: &str| -> Result<(usize, Vec<String>), MdpError> {
        match entry {
            Some((i, raw)) => Ok((i + 1, raw.split_whitespace().map(str::to_string).collect())),
            None => Err(MdpError::Parse { line: 0, message: format!("unexpected end of input, expected {what}") }),
        }
    };

    let (line, header) = expect_line(lines.next(), "header")?;
    if header != ["tabular-mdp", "v1"] {
        return Err(MdpError::Parse { line, message: "expected header `tabular-mdp v1`".to_string() });
    }
    let (line, dims) = expect_line(lines.next(), "dims")?;
    if dims.len() != 5 || dims[0] != "dims" {
        return Err(MdpError::Parse { line, message: "expected `dims S A H start`".to_string() });
    }
    let s_n = parse_usize(&dims[1], line)?;
    let a_n = parse_usize(&dims[2], line)?;
    let horizon = parse_usize(&dims[3], line)?;
    let start = parse_usize(&dims[4], line)?;

    let mut rewards = vec![0.0; s_n * a_n];
    let mut rows = vec![0.0; s_n * a_n * s_n];
    for s in 0..s_n {
        for a in 0..a_n {
            let (line, tokens) = expect_line(lines.next(), "row")?;
            if tokens.len() != 4 + s_n || tokens[0] != "row" {
                return Err(MdpError::Parse { line, message: format!("expected `row s a reward p_0..p_{}`", s_n - 1) });
            }
            if parse_usize(&tokens[1], line)? != s || parse_usize(&tokens[2], line)? != a {
                return Err(MdpError::Parse { line, message: format!("rows must appear in order; expected ({s}, {a})") });
            }
            rewards[s * a_n + a] = parse_f64(&tokens[3], line)?;
            for (i, token) in tokens[4..].iter().enumerate() {
                rows[(s * a_n + a) * s_n + i] = parse_f64(token, line)?;
            }
        }
    }
    let (line, tail) = expect_line(lines.next(), "end")?;
    if tail != ["end"] {
        return Err(MdpError::Parse { line, message: "expected trailing `end`".to_string() });
    }
    TabularMDP::new(s_n, a_n, horizon, start, rewards, rows)
}

/// Writes an MDP file.
pub fn save_mdp(path: &Path, mdp: &TabularMDP) -> Result<(), MdpError> {
    fs::write(path, mdp_to_text(mdp)?)?;
    Ok(())
}

/// Reads an MDP file.
pub fn load_mdp(path: &Path) -> Result<TabularMDP, MdpError> {
    mdp_from_text(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_awkward_values() {
        for &x in &[0.0, 1.0, 0.1, 1.0 / 3.0, 0.6, 1e-300, 0.49999999999999994] {
            let printed = format_f64(x);
            let back = parse_f64(&printed, 0).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{printed} must reparse to the same bits");
        }
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        let third = 1.0 / 3.0;
        let m = TabularMDP::new(
            3,
            2,
            5,
            1,
            vec![0.0, 0.25, 1.0, 0.6, 0.1, 0.0],
            vec![
                third, third, third, 0.0, 1.0, 0.0, 0.5, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.1, 0.2, 0.7,
            ],
        )
        .unwrap();
        let text = mdp_to_text(&m).unwrap();
        let parsed = mdp_from_text(&text).unwrap();
        let text2 = mdp_to_text(&parsed).unwrap();
        assert_eq!(text, text2, "write -> read -> write must be byte-identical");
        assert_eq!(parsed, m);
    }

    #[test]
    fn parser_reports_malformed_input() {
        assert!(matches!(mdp_from_text("nonsense"), Err(MdpError::Parse { .. })));
        let truncated = "tabular-mdp v1\ndims 2 1 3 0\nrow 0 0 0.0 1.0 0.0\n";
        assert!(matches!(mdp_from_text(truncated), Err(MdpError::Parse { .. })));
        let bad_order = "tabular-mdp v1\ndims 2 1 3 0\nrow 1 0 0.0 1.0 0.0\nrow 0 0 0.0 1.0 0.0\nend\n";
        assert!(matches!(mdp_from_text(bad_order), Err(MdpError::Parse { .. })));
    }

    #[test]
    fn unknown_rows_serialize_as_zeros() {
        let m = TabularMDP::new(2, 1, 2, 0, vec![0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let text = mdp_to_text(&m).unwrap();
        let parsed = mdp_from_text(&text).unwrap();
        assert!(parsed.is_dead_end(0, 0, 0));
        assert_eq!(mdp_to_text(&parsed).unwrap(), text);
    }
}
