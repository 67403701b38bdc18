//! The `topology v1` text format.
//!
//! ```text
//! topology v1
//! # comment
//! state 0 h=2 init
//! state 1 h=0 goal
//! edge 0 1
//! ```
//!
//! State ids are dense and 0-based, and must be declared before they are used
//! in an edge. Exactly one state carries `init`; at least one carries `goal`.
//! Edge declaration order is the successor order of the `from` state.
//! Serialization is canonical: states in id order, then edges grouped by
//! source in successor order, no comments. Parsing a canonical document and
//! reserializing it reproduces the bytes.

use super::{StateId, StateRecord, StateSpace};
use std::collections::HashMap;
use std::fmt::Write as _;

/// What went wrong on a particular line.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected header `topology v1`")]
    BadHeader,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("duplicate state id {0}")]
    DuplicateState(u32),
    #[error("state {0} not declared before use")]
    UnknownId(u32),
    #[error("goal state {0} has an outgoing edge")]
    GoalHasSuccessor(u32),
    #[error("goal state {0} must have h=0")]
    GoalNonzeroH(u32),
    #[error("self-loop on state {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(u32, u32),
    #[error("heuristic must be finite, got `{0}`")]
    NonFiniteH(String),
    #[error("second `init` flag (state {0} already initial)")]
    DuplicateInit(u32),
    #[error("no state carries `init`")]
    MissingInit,
    #[error("no state carries `goal`")]
    MissingGoal,
    #[error("state ids are not dense: id {0} missing")]
    MissingStateId(u32),
}

/// Parse failure with the 1-based line it was detected on.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses a `topology v1` document.
pub fn parse_topology(input: &str) -> Result<StateSpace, ParseError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = lines
        .by_ref()
        .find(|(_, l)| !significant(l).is_empty())
        .ok_or_else(|| err(1, ParseErrorKind::BadHeader))?;
    if significant(header.1) != "topology v1" {
        return Err(err(header.0, ParseErrorKind::BadHeader));
    }

    // id -> (record, declaration line); edges in declaration order
    let mut decls: HashMap<u32, StateRecord> = HashMap::new();
    let mut init: Option<u32> = None;
    let mut max_id: u32 = 0;
    let mut edges: Vec<(StateId, StateId)> = Vec::new();
    let mut edge_seen: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
    let mut last_line = header.0;

    for (ln, raw) in lines {
        last_line = ln;
        let line = significant(raw);
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_ascii_whitespace();
        match tok.next().unwrap() {
            "state" => {
                let id = parse_u32(tok.next(), ln, line)?;
                let h_tok = tok
                    .next()
                    .ok_or_else(|| err(ln, ParseErrorKind::Malformed(line.to_string())))?;
                let h_str = h_tok
                    .strip_prefix("h=")
                    .ok_or_else(|| err(ln, ParseErrorKind::Malformed(line.to_string())))?;
                let h: f64 = h_str
                    .parse()
                    .map_err(|_| err(ln, ParseErrorKind::Malformed(line.to_string())))?;
                if !h.is_finite() {
                    return Err(err(ln, ParseErrorKind::NonFiniteH(h_str.to_string())));
                }
                let mut is_init = false;
                let mut is_goal = false;
                for flag in tok {
                    match flag {
                        "init" if !is_init => is_init = true,
                        "goal" if !is_goal => is_goal = true,
                        _ => return Err(err(ln, ParseErrorKind::Malformed(line.to_string()))),
                    }
                }
                if is_goal && h != 0.0 {
                    return Err(err(ln, ParseErrorKind::GoalNonzeroH(id)));
                }
                if decls.insert(id, StateRecord { h, is_goal }).is_some() {
                    return Err(err(ln, ParseErrorKind::DuplicateState(id)));
                }
                if is_init {
                    if let Some(prev) = init {
                        return Err(err(ln, ParseErrorKind::DuplicateInit(prev)));
                    }
                    init = Some(id);
                }
                max_id = max_id.max(id);
            }
            "edge" => {
                let from = parse_u32(tok.next(), ln, line)?;
                let to = parse_u32(tok.next(), ln, line)?;
                if tok.next().is_some() {
                    return Err(err(ln, ParseErrorKind::Malformed(line.to_string())));
                }
                let from_rec = decls
                    .get(&from)
                    .ok_or_else(|| err(ln, ParseErrorKind::UnknownId(from)))?;
                if !decls.contains_key(&to) {
                    return Err(err(ln, ParseErrorKind::UnknownId(to)));
                }
                if from == to {
                    return Err(err(ln, ParseErrorKind::SelfLoop(from)));
                }
                if from_rec.is_goal {
                    return Err(err(ln, ParseErrorKind::GoalHasSuccessor(from)));
                }
                if !edge_seen.insert((from, to)) {
                    return Err(err(ln, ParseErrorKind::DuplicateEdge(from, to)));
                }
                edges.push((StateId(from), StateId(to)));
            }
            _ => return Err(err(ln, ParseErrorKind::Malformed(line.to_string()))),
        }
    }

    if decls.is_empty() {
        return Err(err(
            last_line,
            ParseErrorKind::Malformed("no states".into()),
        ));
    }
    for id in 0..=max_id {
        if !decls.contains_key(&id) {
            return Err(err(last_line, ParseErrorKind::MissingStateId(id)));
        }
    }
    let init = init.ok_or_else(|| err(last_line, ParseErrorKind::MissingInit))?;
    if !decls.values().any(|r| r.is_goal) {
        return Err(err(last_line, ParseErrorKind::MissingGoal));
    }

    let records: Vec<StateRecord> = (0..=max_id).map(|id| decls[&id]).collect();
    // All invariants were checked line by line; the constructor re-checks
    // them without line attribution as a safety net.
    StateSpace::new("", records, StateId(init), edges)
        .map_err(|e| err(last_line, ParseErrorKind::Malformed(e.to_string())))
}

fn significant(raw: &str) -> &str {
    let no_comment = match raw.find('#') {
        Some(i) => &raw[..i],
        None => raw,
    };
    no_comment.trim()
}

fn parse_u32(tok: Option<&str>, ln: usize, line: &str) -> Result<u32, ParseError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| err(ln, ParseErrorKind::Malformed(line.to_string())))
}

/// Serializes to the canonical `topology v1` form.
pub fn serialize_topology(space: &StateSpace) -> String {
    let mut out = String::from("topology v1\n");
    for s in space.states() {
        let r = space.record(s);
        write!(out, "state {} h={}", s, r.h).unwrap();
        if s == space.init() {
            out.push_str(" init");
        }
        if r.is_goal {
            out.push_str(" goal");
        }
        out.push('\n');
    }
    for s in space.states() {
        for &t in space.succ(s) {
            writeln!(out, "edge {} {}", s, t).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "topology v1\nstate 0 h=1 init\nstate 1 h=0 goal\nedge 0 1\n";

    #[test]
    fn parses_minimal() {
        let sp = parse_topology(MINIMAL).unwrap();
        assert_eq!(sp.n(), 2);
        assert_eq!(sp.init(), StateId(0));
        assert_eq!(sp.h(StateId(0)), 1.0);
        assert!(sp.is_goal(StateId(1)));
        assert_eq!(sp.succ(StateId(0)), &[StateId(1)]);
    }

    #[test]
    fn serialization_is_canonical_and_round_trips() {
        let sp = parse_topology(MINIMAL).unwrap();
        assert_eq!(serialize_topology(&sp), MINIMAL);
        // comments and permuted edge/state interleaving normalize away
        let messy =
            "topology v1\n# hi\nstate 1 h=0 goal\nstate 0 h=1 init\n\nedge 0 1 # tail comment\n";
        let sp2 = parse_topology(messy).unwrap();
        assert_eq!(sp2, sp);
        assert_eq!(serialize_topology(&sp2), MINIMAL);
    }

    #[test]
    fn reserializing_is_idempotent() {
        let messy = "topology v1\nstate 0 h=2.5 init\nstate 2 h=0 goal\nstate 1 h=1\nedge 0 1\nedge 1 2\nedge 0 2\n";
        let once = serialize_topology(&parse_topology(messy).unwrap());
        let twice = serialize_topology(&parse_topology(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn error_lines_are_reported() {
        let cases: &[(&str, usize, ParseErrorKind)] = &[
            ("nope\n", 1, ParseErrorKind::BadHeader),
            (
                "topology v1\nstate 0 h=1 init\nstate 0 h=2\nstate 1 h=0 goal\n",
                3,
                ParseErrorKind::DuplicateState(0),
            ),
            (
                "topology v1\nstate 0 h=1 init\nedge 0 1\n",
                3,
                ParseErrorKind::UnknownId(1),
            ),
            (
                "topology v1\nstate 0 h=1 init\nstate 1 h=0 goal\nedge 1 0\n",
                4,
                ParseErrorKind::GoalHasSuccessor(1),
            ),
            (
                "topology v1\nstate 0 h=1 init\nstate 1 h=3 goal\n",
                3,
                ParseErrorKind::GoalNonzeroH(1),
            ),
            (
                "topology v1\nstate 0 h=1 init\nstate 1 h=0 goal\nedge 0 0\n",
                4,
                ParseErrorKind::SelfLoop(0),
            ),
            (
                "topology v1\nstate 0 h=1\nstate 1 h=0 goal\nedge 0 1\n",
                4,
                ParseErrorKind::MissingInit,
            ),
            (
                "topology v1\nstate 0 h=1 init\nwat 1 2\n",
                3,
                ParseErrorKind::Malformed("wat 1 2".into()),
            ),
            (
                "topology v1\nstate 0 h=1 init\nstate 1 h=0 goal\nedge 0 1\nedge 0 1\n",
                5,
                ParseErrorKind::DuplicateEdge(0, 1),
            ),
            (
                "topology v1\nstate 0 h=1 init\nstate 2 h=0 goal\nedge 0 2\n",
                4,
                ParseErrorKind::MissingStateId(1),
            ),
            (
                "topology v1\nstate 0 h=inf init\nstate 1 h=0 goal\n",
                2,
                ParseErrorKind::NonFiniteH("inf".into()),
            ),
        ];
        for (doc, line, kind) in cases {
            let e = parse_topology(doc).unwrap_err();
            assert_eq!(&e.kind, kind, "doc: {doc:?}");
            assert_eq!(e.line, *line, "doc: {doc:?}");
        }
    }

    #[test]
    fn negative_h_parses() {
        // negative heuristics are a validation concern, not a parse error
        let sp =
            parse_topology("topology v1\nstate 0 h=-2 init\nstate 1 h=0 goal\nedge 0 1\n").unwrap();
        assert_eq!(sp.h(StateId(0)), -2.0);
    }

    #[test]
    fn fractional_h_round_trips() {
        let doc = "topology v1\nstate 0 h=2.75 init\nstate 1 h=0 goal\nedge 0 1\n";
        let sp = parse_topology(doc).unwrap();
        assert_eq!(serialize_topology(&sp), doc);
    }
}
