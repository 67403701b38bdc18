//! Shared run bookkeeping: the event log, metric counters, Closed set and
//! parent links. Both backends funnel every observable moment through the
//! `Recorder` so that counting rules live in exactly one place.

use super::trace::{CommitKind, EventKind, TraceEvent};
use super::{LifeCycleTag, Outcome};
use crate::topology::{Path, StateId, StateSpace};
use ordered_float::OrderedFloat;
use std::collections::BTreeMap;

/// Commit order, claims, trace, and the per-h deferred peak table.
pub(crate) type RunParts = (
    Vec<StateId>,
    Vec<StateId>,
    Vec<TraceEvent>,
    BTreeMap<OrderedFloat<f64>, u64>,
);

/// Closed set plus parent links. Closed membership is decided at insertion
/// time (a state enters Closed when something first inserts it), so a state
/// is generated into Open at most once per run.
pub(crate) struct SeenTable {
    closed: Vec<bool>,
    parent: Vec<Option<StateId>>,
}

impl SeenTable {
    pub fn new(space: &StateSpace) -> Self {
        let mut t = SeenTable {
            closed: vec![false; space.n()],
            parent: vec![None; space.n()],
        };
        t.closed[space.init().idx()] = true;
        t
    }

    /// Marks `s` closed with the given parent; false if already present.
    pub fn insert(&mut self, s: StateId, parent: StateId) -> bool {
        if self.closed[s.idx()] {
            return false;
        }
        self.closed[s.idx()] = true;
        self.parent[s.idx()] = Some(parent);
        true
    }

    /// Chases parent links from `s` back to the initial state.
    pub fn path_to(&self, s: StateId) -> Path {
        let mut states = vec![s];
        let mut cur = s;
        while let Some(p) = self.parent[cur.idx()] {
            states.push(p);
            cur = p;
        }
        states.reverse();
        Path { states }
    }
}

pub(crate) struct Recorder {
    trace: Vec<TraceEvent>,
    commits: Vec<(u64, StateId)>,
    pub claims: Vec<StateId>,
    eval_started: Vec<bool>,
    pub evaluated: u64,
    pub generated: u64,
    pub expansions: u64,
    deferred_now: BTreeMap<OrderedFloat<f64>, u64>,
    deferred_peak: BTreeMap<OrderedFloat<f64>, u64>,
}

impl Recorder {
    pub fn new(space: &StateSpace) -> Self {
        Recorder {
            trace: Vec::new(),
            commits: Vec::new(),
            claims: Vec::new(),
            eval_started: vec![false; space.n()],
            evaluated: 0,
            generated: 0,
            expansions: 0,
            deferred_now: BTreeMap::new(),
            deferred_peak: BTreeMap::new(),
        }
    }

    fn push(&mut self, kind: EventKind) -> u64 {
        let i = self.trace.len() as u64;
        self.trace.push(TraceEvent { i, kind });
        i
    }

    /// Records a claim from Open; returns the event index (the commit
    /// sequence number for a-states). Goal claims are not expansions.
    pub fn claim(&mut self, w: u32, s: StateId, h: f64, is_goal: bool) -> u64 {
        self.claims.push(s);
        if !is_goal {
            self.expansions += 1;
        }
        self.push(EventKind::Claim { w, s: s.0, h })
    }

    /// Marks a state as having its evaluation started; true for the first
    /// toucher, who is responsible for the (possibly delayed) evaluation.
    pub fn try_begin_eval(&mut self, s: StateId) -> bool {
        if self.eval_started[s.idx()] {
            return false;
        }
        self.eval_started[s.idx()] = true;
        true
    }

    pub fn finish_eval(&mut self, w: u32, s: StateId, h: f64) {
        self.evaluated += 1;
        self.push(EventKind::Evaluate { w, s: s.0, h });
    }

    /// Evaluation without a cost model: mark, count and log in one step if
    /// this is the first time.
    pub fn evaluate(&mut self, w: u32, s: StateId, h: f64) {
        if self.try_begin_eval(s) {
            self.finish_eval(w, s, h);
        }
    }

    pub fn generated_slots(&mut self, n: u64) {
        self.generated += n;
    }

    pub fn insert(&mut self, w: u32, s: StateId, parent: StateId) {
        self.push(EventKind::Insert {
            w,
            s: s.0,
            parent: parent.0,
        });
    }

    pub fn defer(&mut self, w: u32, s: StateId, h: f64) {
        let occ = self.deferred_now.entry(OrderedFloat(h)).or_insert(0);
        *occ += 1;
        let peak = self.deferred_peak.entry(OrderedFloat(h)).or_insert(0);
        *peak = (*peak).max(*occ);
        self.push(EventKind::Defer { w, s: s.0, h });
    }

    fn deferred_pop_occupancy(&mut self, h: f64) {
        let occ = self
            .deferred_now
            .get_mut(&OrderedFloat(h))
            .expect("pop of tracked h");
        *occ -= 1;
    }

    /// Records a commit. For a-states pass the claim event index as `seq`;
    /// for b-states (Deferred pops) pass `None` to use this event's own
    /// index, and the Deferred occupancy of `h` is decremented.
    pub fn commit(
        &mut self,
        w: u32,
        s: StateId,
        tag: LifeCycleTag,
        seq: Option<u64>,
        h: f64,
    ) -> u64 {
        let (kind, seq) = match tag {
            LifeCycleTag::AState => (
                CommitKind::A,
                seq.expect("a-state commits carry their claim index"),
            ),
            LifeCycleTag::BState => {
                self.deferred_pop_occupancy(h);
                (CommitKind::B, self.trace.len() as u64)
            }
        };
        self.commits.push((seq, s));
        self.push(EventKind::Commit {
            w,
            s: s.0,
            kind,
            seq,
        })
    }

    pub fn committed_count(&self) -> u64 {
        self.commits.len() as u64
    }

    /// Appends the terminal summary row.
    pub fn result_row(&mut self, outcome: &Outcome, algo: super::Algo, k: u32) {
        let (name, path) = match outcome {
            Outcome::Solved(p) => ("solved", Some(p.states.iter().map(|s| s.0).collect())),
            Outcome::Exhausted => ("exhausted", None),
            Outcome::ResourceLimit => ("resource_limit", None),
        };
        let row = EventKind::Result {
            outcome: name.into(),
            path,
            algo: algo.name().into(),
            k,
            expansions: self.expansions,
            completely_expanded: self.committed_count(),
            evaluated: self.evaluated,
            generated: self.generated,
        };
        self.push(row);
    }

    /// Commit order (stable by sequence number) and the trace, consuming
    /// the recorder.
    pub fn into_parts(mut self) -> RunParts {
        self.commits.sort_by_key(|&(seq, _)| seq);
        let order = self.commits.iter().map(|&(_, s)| s).collect();
        (order, self.claims, self.trace, self.deferred_peak)
    }
}
