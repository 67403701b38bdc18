//! Worker schedules: the `schedule v1` text format and the shipped
//! adversarial interleavings for the pathological families.
//!
//! A schedule is a list of worker ids, one per atomic region of a virtual
//! run. The format is one id per line, with `<id> xN` as run-length
//! shorthand; `#` starts a comment, blank lines are ignored.

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("schedule line {line}: {kind}")]
pub struct ScheduleParseError {
    pub line: usize,
    pub kind: ScheduleParseErrorKind,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScheduleParseErrorKind {
    #[error("expected header `schedule v1`")]
    BadHeader,
    #[error("malformed entry: {0}")]
    Malformed(String),
    #[error("repeat count must be at least 1")]
    ZeroRepeat,
}

fn significant(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parses a `schedule v1` document into a worker-id list.
pub fn parse_schedule(input: &str) -> Result<Vec<u32>, ScheduleParseError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = lines
        .by_ref()
        .find(|(_, l)| !significant(l).is_empty())
        .ok_or(ScheduleParseError {
            line: 1,
            kind: ScheduleParseErrorKind::BadHeader,
        })?;
    if significant(header.1) != "schedule v1" {
        return Err(ScheduleParseError {
            line: header.0,
            kind: ScheduleParseErrorKind::BadHeader,
        });
    }

    let mut steps = Vec::new();
    for (no, raw) in lines {
        let body = significant(raw);
        if body.is_empty() {
            continue;
        }
        let malformed = || ScheduleParseError {
            line: no,
            kind: ScheduleParseErrorKind::Malformed(body.into()),
        };
        let mut parts = body.split_whitespace();
        let worker: u32 = parts.next().unwrap().parse().map_err(|_| malformed())?;
        match parts.next() {
            None => steps.push(worker),
            Some(rep) => {
                if parts.next().is_some() {
                    return Err(malformed());
                }
                let count: u64 = rep
                    .strip_prefix('x')
                    .ok_or_else(malformed)?
                    .parse()
                    .map_err(|_| malformed())?;
                if count == 0 {
                    return Err(ScheduleParseError {
                        line: no,
                        kind: ScheduleParseErrorKind::ZeroRepeat,
                    });
                }
                steps.extend(std::iter::repeat_n(worker, count as usize));
            }
        }
    }
    Ok(steps)
}

/// Serializes a worker-id list as `schedule v1` with maximal run-length
/// compression.
pub fn serialize_schedule(steps: &[u32]) -> String {
    let mut out = String::from("schedule v1\n");
    let mut i = 0;
    while i < steps.len() {
        let w = steps[i];
        let mut j = i + 1;
        while j < steps.len() && steps[j] == w {
            j += 1;
        }
        let run = j - i;
        if run == 1 {
            out.push_str(&format!("{w}\n"));
        } else {
            out.push_str(&format!("{w} x{run}\n"));
        }
        i = j;
    }
    out
}

/// The 2-worker interleaving that drives a constrained parallel search
/// through every line of a `patho2(x, t)` instance under FIFO ties.
///
/// The pattern follows the construction level by level: both branch heads
/// of a level are claimed back to back (the two workers tie at the band
/// value, so the claim of the second head is constraint-legal while the
/// first is in flight), then one worker drains the level's line alone.
/// On the last level the two final lines are interleaved state by state,
/// which keeps both descending at equal h until the two exits meet the
/// goal. Every line state in the instance is expanded.
pub fn adversarial_schedule_patho2(x: u32, t: u32) -> Vec<u32> {
    assert!(x >= 1 && t >= 1);
    let mut s = Vec::new();
    let quad = [0u32, 1, 0, 1];
    // claim s0, insert its two heads
    s.extend([0, 0]);
    for _ in 0..t {
        // claim u_i and v_i together, then drain the level's line
        s.extend(quad);
        for _ in 0..x {
            s.extend([0, 0]);
        }
    }
    // the two final heads, their lines in lockstep, the two exits
    s.extend(quad);
    for _ in 0..x {
        s.extend(quad);
    }
    s.extend(quad);
    // the goal claim
    s.push(0);
    s
}

/// [`adversarial_schedule_patho2`] at nesting depth 1, matching
/// `gen_patho1(x)`.
pub fn adversarial_schedule_patho1(x: u32) -> Vec<u32> {
    adversarial_schedule_patho2(x, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_with_rle() {
        let steps = vec![0, 0, 0, 1, 0, 1, 1, 1, 1, 2];
        let text = serialize_schedule(&steps);
        assert_eq!(text, "schedule v1\n0 x3\n1\n0\n1 x4\n2\n");
        assert_eq!(parse_schedule(&text).unwrap(), steps);
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# preamble\n\nschedule v1\n0 x2 # both regions of the first claim\n\n1\n";
        assert_eq!(parse_schedule(text).unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_schedule("not a schedule\n").unwrap_err().kind,
            ScheduleParseErrorKind::BadHeader
        );
        assert_eq!(parse_schedule("schedule v1\nzzz\n").unwrap_err().line, 2);
        assert_eq!(
            parse_schedule("schedule v1\n0 y4\n").unwrap_err().kind,
            ScheduleParseErrorKind::Malformed("0 y4".into())
        );
        assert_eq!(
            parse_schedule("schedule v1\n0 x0\n").unwrap_err().kind,
            ScheduleParseErrorKind::ZeroRepeat
        );
        assert_eq!(parse_schedule("schedule v1\n0 x2 3\n").unwrap_err().line, 2);
    }

    #[test]
    fn adversarial_schedule_realizes_the_pathological_count() {
        use super::super::{puhf_c, Schedule, TiePolicy};
        use crate::topology::{gen_patho2, patho2_info};
        for (x, t) in [(1, 1), (5, 1), (5, 3), (12, 2)] {
            let sp = gen_patho2(x, t);
            let info = patho2_info(x, t);
            let sched = Schedule::virtual_scripted(adversarial_schedule_patho2(x, t));
            let r = puhf_c(&sp, 2, TiePolicy::Fifo, &sched).unwrap();
            assert!(r.outcome.is_solved(), "x={x} t={t}");
            assert_eq!(r.expansions, info.pathological_expansions, "x={x} t={t}");
            // every line state is expanded, which is the whole point
            let lines = crate::topology::patho2_info(x, t).line_states;
            for s in lines {
                assert!(
                    r.claimed.contains(&s),
                    "x={x} t={t} line state {s} unclaimed"
                );
            }
        }
    }

    #[test]
    fn schedule_lengths_match_the_construction() {
        // 2 + t(4 + 2x) + (4 + 4x + 4 + 1)
        for (x, t) in [(1, 1), (5, 3), (40, 2)] {
            let s = adversarial_schedule_patho2(x, t);
            assert_eq!(
                s.len() as u32,
                2 * t * x + 4 * t + 4 * x + 11,
                "x={x} t={t}"
            );
        }
        assert_eq!(
            adversarial_schedule_patho1(7),
            adversarial_schedule_patho2(7, 1)
        );
    }

    #[test]
    fn shipped_schedule_matches_the_generator() {
        let shipped = include_str!("../../fixtures/patho1_x1000_k2.schedule");
        assert_eq!(
            shipped,
            serialize_schedule(&adversarial_schedule_patho1(1000))
        );
        assert_eq!(
            parse_schedule(shipped).unwrap(),
            adversarial_schedule_patho1(1000)
        );
    }
}
