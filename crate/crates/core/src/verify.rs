//! Checks of the run guarantees over recorded data.
//!
//! Every verdict here is computed from a state space plus either a finished
//! [`SearchResult`] or its trace; nothing peeks into live engine state, so
//! a check that passes in-process passes identically on a trace file read
//! back later. The replay check and the bench analysis are independent
//! reimplementations of the sequential semantics (no shared queue code with
//! the engine), which is what lets them act as oracles for it.

use crate::analyzer;
use crate::engine::{Algo, CommitKind, EventKind, Outcome, SearchResult, TraceEvent};
use crate::topology::{Path, StateId, StateSpace};
use ordered_float::OrderedFloat;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::time::Duration;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Outcome of one check: a verdict, a witness when it fails, and the
/// numbers the verdict was computed from.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub check: &'static str,
    pub verdict: Verdict,
    pub witness: Option<String>,
    pub measured: Vec<(&'static str, f64)>,
}

impl CheckReport {
    fn pass(check: &'static str, measured: Vec<(&'static str, f64)>) -> Self {
        CheckReport {
            check,
            verdict: Verdict::Pass,
            witness: None,
            measured,
        }
    }

    fn fail(check: &'static str, witness: String, measured: Vec<(&'static str, f64)>) -> Self {
        CheckReport {
            check,
            verdict: Verdict::Fail,
            witness: Some(witness),
            measured,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("instance too large for exhaustive worst-case search ({0} tie settings explored)")]
    InstanceTooLarge(usize),
}

/// Checks that `order` is an expansion order some tie-breaking of
/// sequential greedy best-first search could produce: simulating Open and
/// Closed, each state must be present in Open and tie for its minimum h at
/// the moment it is expanded.
pub fn replay_gbfs_validity(space: &StateSpace, order: &[StateId]) -> CheckReport {
    const CHECK: &str = "replay";
    let mut open: BTreeSet<(OrderedFloat<f64>, StateId)> = BTreeSet::new();
    let mut closed = vec![false; space.n()];
    let init = space.init();
    closed[init.idx()] = true;
    open.insert((OrderedFloat(space.h(init)), init));
    for (i, &s) in order.iter().enumerate() {
        let steps = ("steps_checked", i as f64);
        let key = (OrderedFloat(space.h(s)), s);
        if !open.contains(&key) {
            return CheckReport::fail(
                CHECK,
                format!("step {i}: state {s} is not in the simulated Open"),
                vec![steps],
            );
        }
        let min = open.first().expect("membership implies non-empty").0 .0;
        if space.h(s) > min {
            return CheckReport::fail(
                CHECK,
                format!(
                    "step {i}: state {s} has h={}, Open minimum is {min}",
                    space.h(s)
                ),
                vec![steps],
            );
        }
        open.remove(&key);
        for &c in space.succ(s) {
            if !closed[c.idx()] {
                closed[c.idx()] = true;
                open.insert((OrderedFloat(space.h(c)), c));
            }
        }
    }
    CheckReport::pass(CHECK, vec![("steps_checked", order.len() as f64)])
}

fn state_list(states: &[StateId]) -> String {
    let head: Vec<String> = states.iter().take(8).map(|s| s.to_string()).collect();
    let tail = if states.len() > 8 { ", …" } else { "" };
    format!("{}{tail}", head.join(", "))
}

/// Checks that every state the run committed or claimed lies in the bench
/// transition system, i.e. could have been expanded by some sequential run.
pub fn check_bts_constrained(space: &StateSpace, result: &SearchResult) -> CheckReport {
    const CHECK: &str = "btc";
    let allowed = analyzer::bts_states(space);
    let mut touched: BTreeSet<StateId> = result.committed_order.iter().copied().collect();
    touched.extend(result.claimed.iter().copied());
    let bad: Vec<StateId> = touched
        .iter()
        .copied()
        .filter(|s| !allowed.contains(s))
        .collect();
    let measured = vec![
        ("checked", touched.len() as f64),
        ("bts_states", allowed.len() as f64),
        ("violations", bad.len() as f64),
    ];
    if bad.is_empty() {
        CheckReport::pass(CHECK, measured)
    } else {
        CheckReport::fail(
            CHECK,
            format!("states outside the BTS: {}", state_list(&bad)),
            measured,
        )
    }
}

/// Checks the Deferred-queue bounds of a solved run: residual size at most
/// k·|p|, at most |p| distinct residual h values, and per-h instantaneous
/// occupancy never above k, where |p| counts the states of the returned
/// path.
pub fn check_deferred_bounds(result: &SearchResult) -> CheckReport {
    const CHECK: &str = "deferred";
    let k = result.k as u64;
    let Some(p) = result.solution() else {
        return CheckReport::fail(
            CHECK,
            "run is not solved; the Deferred bounds are stated over a solution path".into(),
            vec![],
        );
    };
    let plen = p.states.len() as u64;
    let residual = result.deferred_residual.len() as u64;
    let distinct_h = result
        .deferred_residual
        .iter()
        .map(|&(_, h)| OrderedFloat(h))
        .collect::<BTreeSet<_>>()
        .len() as u64;
    let peak = result
        .per_h_deferred_peak
        .values()
        .copied()
        .max()
        .unwrap_or(0);
    let measured = vec![
        ("residual", residual as f64),
        ("residual_bound", (k * plen) as f64),
        ("distinct_h", distinct_h as f64),
        ("distinct_h_bound", plen as f64),
        ("per_h_peak", peak as f64),
        ("per_h_peak_bound", k as f64),
    ];
    let mut broken = Vec::new();
    if residual > k * plen {
        broken.push(format!("residual {residual} > k·|p| = {}", k * plen));
    }
    if distinct_h > plen {
        broken.push(format!(
            "{distinct_h} distinct residual h values > |p| = {plen}"
        ));
    }
    if peak > k {
        broken.push(format!(
            "per-h Deferred occupancy peaked at {peak} > k = {k}"
        ));
    }
    if broken.is_empty() {
        CheckReport::pass(CHECK, measured)
    } else {
        CheckReport::fail(CHECK, broken.join("; "), measured)
    }
}

/// Checks a solved run against the worst sequential baseline: completely
/// expanded states at most N_worst, and total expansions at most
/// N_worst + k·|p|. Pass `n_worst` when the instance is too large for
/// [`worst_case_gbfs`] (generator families ship their constants).
pub fn check_expansion_bound(
    space: &StateSpace,
    result: &SearchResult,
    n_worst: Option<u64>,
) -> Result<CheckReport, VerifyError> {
    const CHECK: &str = "bound";
    let n_worst = match n_worst {
        Some(v) => v,
        None => worst_case_gbfs(space)?,
    };
    let Some(p) = result.solution() else {
        return Ok(CheckReport::fail(
            CHECK,
            "run is not solved; the expansion bound is stated over a solution path".into(),
            vec![("n_worst", n_worst as f64)],
        ));
    };
    let k = result.k as u64;
    let plen = p.states.len() as u64;
    let bound = n_worst + k * plen;
    let measured = vec![
        ("completely_expanded", result.completely_expanded as f64),
        ("expansions", result.expansions as f64),
        ("n_worst", n_worst as f64),
        ("bound", bound as f64),
        ("path_len", plen as f64),
    ];
    let mut broken = Vec::new();
    if result.completely_expanded > n_worst {
        broken.push(format!(
            "completely expanded {} > N_worst = {n_worst}",
            result.completely_expanded
        ));
    }
    if result.expansions > bound {
        broken.push(format!(
            "expansions {} > N_worst + k·|p| = {bound}",
            result.expansions
        ));
    }
    Ok(if broken.is_empty() {
        CheckReport::pass(CHECK, measured)
    } else {
        CheckReport::fail(CHECK, broken.join("; "), measured)
    })
}

/// Memo budget for [`worst_case_gbfs`]: distinct Closed sets explored.
const WORST_CASE_BUDGET: usize = 1 << 18;

/// Maximum expansion count over every tie-breaking resolution of
/// sequential greedy best-first search, by exhaustive branching over the
/// minimum-h group with memoization on the Closed set. Goal pops end a
/// branch and are not counted. Refuses instances whose tie structure
/// explodes past the memo budget.
pub fn worst_case_gbfs(space: &StateSpace) -> Result<u64, VerifyError> {
    let words = space.n().div_ceil(64);
    let mut memo: HashMap<Vec<u64>, u64> = HashMap::new();

    fn explore(
        space: &StateSpace,
        closed: &mut Vec<u64>,
        memo: &mut HashMap<Vec<u64>, u64>,
    ) -> Result<u64, VerifyError> {
        if let Some(&v) = memo.get(closed) {
            return Ok(v);
        }
        let member = |mask: &[u64], s: StateId| mask[s.idx() / 64] >> (s.idx() % 64) & 1 == 1;
        // Open is derivable from Closed: everything generated (the initial
        // state, or a successor of an expanded state) and not yet expanded
        let mut open: Vec<StateId> = Vec::new();
        let mut min = f64::INFINITY;
        let mut seen = vec![false; space.n()];
        let mut consider = |s: StateId, open: &mut Vec<StateId>, min: &mut f64| {
            if !seen[s.idx()] {
                seen[s.idx()] = true;
                open.push(s);
                *min = min.min(space.h(s));
            }
        };
        if !member(closed, space.init()) {
            consider(space.init(), &mut open, &mut min);
        }
        for s in space.states() {
            if member(closed, s) {
                for &c in space.succ(s) {
                    if !member(closed, c) {
                        consider(c, &mut open, &mut min);
                    }
                }
            }
        }
        let mut best = 0u64;
        for &s in open.iter().filter(|&&s| space.h(s) == min) {
            if space.is_goal(s) {
                continue; // popping the goal ends the run with no expansion
            }
            closed[s.idx() / 64] |= 1 << (s.idx() % 64);
            let below = explore(space, closed, memo)?;
            closed[s.idx() / 64] &= !(1 << (s.idx() % 64));
            best = best.max(1 + below);
        }
        if memo.len() >= WORST_CASE_BUDGET {
            return Err(VerifyError::InstanceTooLarge(memo.len()));
        }
        memo.insert(closed.clone(), best);
        Ok(best)
    }

    let mut closed = vec![0u64; words];
    closed[space.init().idx() / 64] |= 1 << (space.init().idx() % 64);
    // the root call counts the initial expansion itself, unless the init
    // state is a goal
    if space.is_goal(space.init()) {
        return Ok(0);
    }
    Ok(1 + explore(space, &mut closed, &mut memo)?)
}

/// Expansion-count comparison of two runs.
#[derive(Clone, Debug)]
pub struct RatioRecord {
    pub a: String,
    pub b: String,
    pub expansions_a: u64,
    pub expansions_b: u64,
    pub ratio: f64,
}

impl RatioRecord {
    pub fn new(
        a: impl Into<String>,
        expansions_a: u64,
        b: impl Into<String>,
        expansions_b: u64,
    ) -> Self {
        assert!(
            expansions_b > 0,
            "ratio base must have at least one expansion"
        );
        RatioRecord {
            a: a.into(),
            b: b.into(),
            expansions_a,
            expansions_b,
            ratio: expansions_a as f64 / expansions_b as f64,
        }
    }
}

/// Ratio of total expansions, `a` over `b`.
pub fn expansion_ratio(a: &SearchResult, b: &SearchResult) -> RatioRecord {
    RatioRecord::new(a.algo.name(), a.expansions, b.algo.name(), b.expansions)
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("event {at} has index {found}, expected {expected}")]
    BadIndex {
        at: usize,
        found: u64,
        expected: u64,
    },
    #[error("trace has no terminal result row")]
    MissingResult,
    #[error("events continue after the result row")]
    TrailingEvents,
    #[error("state {0} is out of range for this space")]
    BadState(u32),
    #[error("result row: unknown algorithm `{0}`")]
    UnknownAlgo(String),
    #[error("result row: unknown outcome `{0}`")]
    UnknownOutcome(String),
    #[error("result row: solved but no path recorded")]
    MissingPath,
    #[error("trace inconsistent with its result row: {0}")]
    Inconsistent(String),
}

/// Reconstructs a [`SearchResult`] from a trace, validating it against the
/// space: indices must be contiguous, states in range, and the terminal row
/// consistent with the recorded events. Wall time is not recoverable and is
/// reported as zero.
pub fn result_from_trace(
    space: &StateSpace,
    trace: Vec<TraceEvent>,
) -> Result<SearchResult, TraceError> {
    if trace.is_empty() {
        return Err(TraceError::Empty);
    }
    let in_range = |s: u32| -> Result<StateId, TraceError> {
        if (s as usize) < space.n() {
            Ok(StateId(s))
        } else {
            Err(TraceError::BadState(s))
        }
    };
    let mut claimed = Vec::new();
    let mut commits: Vec<(u64, StateId)> = Vec::new();
    let mut evaluated_seen = 0u64;
    let mut deferred_now: BTreeMap<OrderedFloat<f64>, u64> = BTreeMap::new();
    let mut peak: BTreeMap<OrderedFloat<f64>, u64> = BTreeMap::new();
    let mut parked: BTreeMap<StateId, (usize, f64)> = BTreeMap::new();
    let mut defer_seq = 0usize;
    let mut row = None;
    for (at, ev) in trace.iter().enumerate() {
        if ev.i != at as u64 {
            return Err(TraceError::BadIndex {
                at,
                found: ev.i,
                expected: at as u64,
            });
        }
        if row.is_some() {
            return Err(TraceError::TrailingEvents);
        }
        match &ev.kind {
            EventKind::Claim { s, .. } => claimed.push(in_range(*s)?),
            EventKind::Evaluate { s, .. } => {
                in_range(*s)?;
                evaluated_seen += 1;
            }
            EventKind::Insert { s, parent, .. } => {
                in_range(*s)?;
                in_range(*parent)?;
            }
            EventKind::Defer { s, h, .. } => {
                let s = in_range(*s)?;
                parked.insert(s, (defer_seq, *h));
                defer_seq += 1;
                let occ = deferred_now.entry(OrderedFloat(*h)).or_insert(0);
                *occ += 1;
                let p = peak.entry(OrderedFloat(*h)).or_insert(0);
                *p = (*p).max(*occ);
            }
            EventKind::Commit { s, kind, seq, .. } => {
                let s = in_range(*s)?;
                if *kind == CommitKind::B {
                    let (_, h) = parked.remove(&s).ok_or_else(|| {
                        TraceError::Inconsistent(format!(
                            "state {s} commits from Deferred without a defer event"
                        ))
                    })?;
                    let occ = deferred_now.get_mut(&OrderedFloat(h)).expect("tracked h");
                    *occ -= 1;
                }
                commits.push((*seq, s));
            }
            EventKind::Result { .. } => row = Some(ev.kind.clone()),
        }
    }
    let Some(EventKind::Result {
        outcome,
        path,
        algo,
        k,
        expansions,
        completely_expanded,
        evaluated,
        generated,
    }) = row
    else {
        return Err(TraceError::MissingResult);
    };
    let algo: Algo = algo
        .parse()
        .map_err(|_| TraceError::UnknownAlgo(algo.clone()))?;
    let outcome = match outcome.as_str() {
        "solved" => {
            let states = path.ok_or(TraceError::MissingPath)?;
            let states: Vec<StateId> = states
                .iter()
                .map(|&s| in_range(s))
                .collect::<Result<_, _>>()?;
            Outcome::Solved(Path { states })
        }
        "exhausted" => Outcome::Exhausted,
        "resource_limit" => Outcome::ResourceLimit,
        other => return Err(TraceError::UnknownOutcome(other.into())),
    };
    let claimed_goals = claimed.iter().filter(|&&s| space.is_goal(s)).count() as u64;
    if claimed.len() as u64 - claimed_goals != expansions {
        return Err(TraceError::Inconsistent(format!(
            "{} non-goal claims recorded, result row says {expansions} expansions",
            claimed.len() as u64 - claimed_goals
        )));
    }
    if commits.len() as u64 != completely_expanded {
        return Err(TraceError::Inconsistent(format!(
            "{} commits recorded, result row says {completely_expanded}",
            commits.len()
        )));
    }
    if evaluated_seen != evaluated {
        return Err(TraceError::Inconsistent(format!(
            "{evaluated_seen} evaluations recorded, result row says {evaluated}"
        )));
    }
    commits.sort_by_key(|&(seq, _)| seq);
    let committed_order = commits.into_iter().map(|(_, s)| s).collect();
    // Match the engine's drain order: ascending h, defer order within ties.
    let mut residual: Vec<(StateId, (usize, f64))> = parked.into_iter().collect();
    residual.sort_by_key(|&(_, (at, h))| (OrderedFloat(h), at));
    let deferred_residual = residual.into_iter().map(|(s, (_, h))| (s, h)).collect();
    Ok(SearchResult {
        algo,
        k,
        outcome,
        committed_order,
        claimed,
        expansions,
        completely_expanded,
        generated,
        evaluated,
        deferred_residual,
        per_h_deferred_peak: peak,
        wall_time: Duration::ZERO,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::tests::chain;
    use crate::engine::{
        adversarial_schedule_patho2, gbfs, kpgbfs, obat, obat_s, puhf_c, Schedule, TiePolicy,
    };
    use crate::topology::{
        gen_patho1, gen_patho2, gen_random, patho1_info, patho2_info, HMode, StateRecord,
    };

    #[test]
    fn replay_accepts_gbfs_orders() {
        for seed in 0..40 {
            let sp = gen_random(seed, 6 + (seed % 18) as u32, 3, HMode::Layered);
            let r = gbfs(&sp, TiePolicy::Fifo).unwrap();
            let report = replay_gbfs_validity(&sp, &r.committed_order);
            assert!(report.passed(), "seed {seed}: {:?}", report.witness);
        }
    }

    #[test]
    fn replay_rejects_a_swapped_order() {
        let sp = chain(&[3.0, 2.0, 1.0, 0.5, 0.0]);
        let mut order = gbfs(&sp, TiePolicy::Fifo).unwrap().committed_order;
        order.swap(1, 2); // distinct h, so the earlier expansion is not min
        let report = replay_gbfs_validity(&sp, &order);
        assert_eq!(report.verdict, Verdict::Fail);
        let witness = report.witness.unwrap();
        assert!(witness.contains("step 1"), "{witness}");
    }

    #[test]
    fn replay_rejects_states_never_generated() {
        let sp = chain(&[3.0, 2.0, 1.0, 0.0]);
        let order = vec![StateId(0), StateId(2)]; // 2 not yet generated
        let report = replay_gbfs_validity(&sp, &order);
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report
            .witness
            .unwrap()
            .contains("not in the simulated Open"));
    }

    fn decoy() -> StateSpace {
        // d (h=3) sits above the initial bench's level 2, so it is outside
        // the BTS, yet an unconstrained 2-worker run can claim it
        let records = vec![
            StateRecord {
                h: 3.0,
                is_goal: false,
            },
            StateRecord {
                h: 2.0,
                is_goal: false,
            },
            StateRecord {
                h: 3.0,
                is_goal: false,
            },
            StateRecord {
                h: 1.0,
                is_goal: false,
            },
            StateRecord {
                h: 0.0,
                is_goal: true,
            },
        ];
        StateSpace::new(
            "decoy",
            records,
            StateId(0),
            vec![
                (StateId(0), StateId(1)),
                (StateId(0), StateId(2)),
                (StateId(1), StateId(3)),
                (StateId(3), StateId(4)),
                (StateId(2), StateId(4)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn bts_check_passes_gbfs_and_catches_the_decoy() {
        let sp = decoy();
        let seq = gbfs(&sp, TiePolicy::Fifo).unwrap();
        assert!(check_bts_constrained(&sp, &seq).passed());

        let sched = Schedule::virtual_scripted(vec![0, 0, 0, 1, 1, 1]);
        let wild = kpgbfs(&sp, 2, TiePolicy::Fifo, &sched).unwrap();
        let report = check_bts_constrained(&sp, &wild);
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.witness.unwrap().contains('2'));

        let sched = Schedule::virtual_seeded(0);
        let tame = puhf_c(&sp, 2, TiePolicy::Fifo, &sched).unwrap();
        assert!(check_bts_constrained(&sp, &tame).passed());
    }

    #[test]
    fn deferred_bounds_pass_and_negative_control_fails() {
        let sp = gen_patho1(12);
        let r = obat(&sp, 2, TiePolicy::Fifo, &Schedule::virtual_seeded(3)).unwrap();
        assert!(r.outcome.is_solved());
        assert!(check_deferred_bounds(&r).passed());

        // doctor the same result: k+1 residual entries at one h value
        let mut doctored = r.clone();
        doctored
            .per_h_deferred_peak
            .insert(OrderedFloat(5.0), doctored.k as u64 + 1);
        let report = check_deferred_bounds(&doctored);
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.witness.unwrap().contains("peaked"));
    }

    #[test]
    fn worst_case_matches_generator_constants() {
        assert_eq!(
            worst_case_gbfs(&gen_patho1(5)).unwrap(),
            patho1_info(5).worst_case_expansions
        );
        assert_eq!(
            worst_case_gbfs(&gen_patho2(5, 3)).unwrap(),
            patho2_info(5, 3).worst_case_expansions
        );
        // tie-free chains have a unique run
        let sp = chain(&[4.0, 3.0, 2.0, 1.0, 0.0]);
        let unique = gbfs(&sp, TiePolicy::Fifo).unwrap().expansions;
        assert_eq!(worst_case_gbfs(&sp).unwrap(), unique);
    }

    #[test]
    fn worst_case_dominates_every_tie_policy() {
        for seed in 0..25 {
            let sp = gen_random(seed, 10, 3, HMode::Layered);
            let worst = worst_case_gbfs(&sp).unwrap();
            for tie in [TiePolicy::Fifo, TiePolicy::Lifo, TiePolicy::Random(seed)] {
                let r = gbfs(&sp, tie).unwrap();
                assert!(
                    r.expansions <= worst,
                    "seed {seed}: {} > {worst}",
                    r.expansions
                );
            }
        }
    }

    #[test]
    fn worst_case_refuses_exploding_plateaus() {
        // a 19-wide dead-end plateau of equal h is expanded in every order,
        // so its 2^19 closed subsets blow past the memo budget
        let width = 19u32;
        let mut records = vec![StateRecord {
            h: 2.0,
            is_goal: false,
        }];
        let mut edges = Vec::new();
        for i in 1..=width {
            records.push(StateRecord {
                h: 1.0,
                is_goal: false,
            });
            edges.push((StateId(0), StateId(i)));
        }
        records.push(StateRecord {
            h: 0.0,
            is_goal: true,
        }); // unreachable
        let sp = StateSpace::new("plateau", records, StateId(0), edges).unwrap();
        assert!(matches!(
            worst_case_gbfs(&sp),
            Err(VerifyError::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn expansion_bound_holds_for_obat_and_fails_for_scheduled_puhf() {
        let sp = gen_patho2(5, 3);
        for seed in 0..10 {
            let r = obat(&sp, 2, TiePolicy::Fifo, &Schedule::virtual_seeded(seed)).unwrap();
            let report = check_expansion_bound(&sp, &r, None).unwrap();
            assert!(report.passed(), "seed {seed}: {:?}", report.witness);
        }
        let sched = Schedule::virtual_scripted(adversarial_schedule_patho2(5, 3));
        let r = puhf_c(&sp, 2, TiePolicy::Fifo, &sched).unwrap();
        let report = check_expansion_bound(&sp, &r, None).unwrap();
        assert_eq!(report.verdict, Verdict::Fail, "{:?}", report.measured);
        // the constrained-but-undeferred search is pathological here:
        // (t+2)x + 2t + 5 = 36 expansions against N_worst + k|p| = 35
        assert!(report.witness.unwrap().contains("36"));
    }

    #[test]
    fn ratio_record_basics() {
        let sp = gen_patho1(6);
        let a = gbfs(&sp, TiePolicy::Fifo).unwrap();
        let r = expansion_ratio(&a, &a);
        assert_eq!(r.ratio, 1.0);
        let rr = RatioRecord::new("puhf-c", 30, "gbfs-worst", 10);
        assert_eq!(rr.ratio, 3.0);
    }

    #[test]
    fn trace_round_trips_to_equal_results() {
        let sp = gen_random(7, 40, 3, HMode::NoisyDistance);
        for (algo, sched) in [
            (Algo::Obat, Schedule::virtual_seeded(11)),
            (Algo::ObatS, Schedule::virtual_seeded(12)),
            (Algo::Kpgbfs, Schedule::virtual_seeded(13)),
        ] {
            let r = crate::engine::run(algo, &sp, 3, TiePolicy::Fifo, &sched).unwrap();
            let back = result_from_trace(&sp, r.trace.clone()).unwrap();
            assert_eq!(back.algo, r.algo);
            assert_eq!(back.k, r.k);
            assert_eq!(back.outcome, r.outcome);
            assert_eq!(back.committed_order, r.committed_order);
            assert_eq!(back.claimed, r.claimed);
            assert_eq!(back.expansions, r.expansions);
            assert_eq!(back.evaluated, r.evaluated);
            assert_eq!(back.generated, r.generated);
            assert_eq!(back.deferred_residual, r.deferred_residual);
            assert_eq!(back.per_h_deferred_peak, r.per_h_deferred_peak);
        }
    }

    #[test]
    fn trace_errors_are_specific() {
        let sp = gen_random(7, 10, 2, HMode::Layered);
        let r = gbfs(&sp, TiePolicy::Fifo).unwrap();

        let mut cut = r.trace.clone();
        cut.pop();
        assert!(matches!(
            result_from_trace(&sp, cut),
            Err(TraceError::MissingResult)
        ));

        let mut shifted = r.trace.clone();
        shifted[2].i = 9;
        assert!(matches!(
            result_from_trace(&sp, shifted),
            Err(TraceError::BadIndex {
                at: 2,
                found: 9,
                ..
            })
        ));

        let mut wrong = r.trace.clone();
        if let EventKind::Result { expansions, .. } = &mut wrong.last_mut().unwrap().kind {
            *expansions += 1;
        }
        assert!(matches!(
            result_from_trace(&sp, wrong),
            Err(TraceError::Inconsistent(_))
        ));

        assert!(matches!(
            result_from_trace(&sp, Vec::new()),
            Err(TraceError::Empty)
        ));
    }

    #[test]
    fn checks_work_identically_from_replayed_traces() {
        let sp = gen_patho1(8);
        let r = obat(&sp, 2, TiePolicy::Fifo, &Schedule::virtual_seeded(5)).unwrap();
        let back = result_from_trace(&sp, r.trace.clone()).unwrap();
        let direct = replay_gbfs_validity(&sp, &r.committed_order);
        let redone = replay_gbfs_validity(&sp, &back.committed_order);
        assert_eq!(direct.verdict, redone.verdict);
        assert_eq!(
            check_deferred_bounds(&r).verdict,
            check_deferred_bounds(&back).verdict
        );
        assert_eq!(
            check_bts_constrained(&sp, &r).verdict,
            check_bts_constrained(&sp, &back).verdict
        );
    }

    #[test]
    fn obat_s_commit_orders_replay_too() {
        for seed in 0..25 {
            let sp = gen_random(seed + 100, 25, 3, HMode::Layered);
            for k in [2, 4] {
                let r = obat_s(&sp, k, TiePolicy::Fifo, &Schedule::virtual_seeded(seed)).unwrap();
                let report = replay_gbfs_validity(&sp, &r.committed_order);
                assert!(report.passed(), "seed {seed} k {k}: {:?}", report.witness);
            }
        }
    }
}
