//! Search engines.
//!
//! One sequential algorithm (greedy best-first search) and four parallel
//! ones sharing a single Open list:
//!
//! * `kpgbfs`: k workers, each greedily claiming the minimum-h state; no
//!   expansion constraint.
//! * `puhf_c`: kpgbfs plus a claim constraint: a worker may take the top of
//!   Open only when its h does not exceed the minimum h among states other
//!   workers are currently expanding.
//! * `obat`: the constraint plus deferral: a claimed state with a strictly
//!   lower-h successor (a b-state) is parked in a Deferred queue with its
//!   successors withheld from Open; Deferred is drained, ties first, under
//!   the same constraint, one bench at a time.
//! * `obat_s`: obat with generation and evaluation separated: the claiming
//!   worker only generates successors into a shared Unevaluated queue, idle
//!   workers evaluate them, and a sibling set enters Open all at once when
//!   its last member has been evaluated.
//!
//! Every parallel algorithm runs on either of two backends. The native
//! backend uses real threads and measures wall time. The virtual backend is
//! a single-threaded interpreter that executes the same algorithm as k
//! logical workers, one atomic region per scheduler step, driven by a seed
//! or an explicit worker script; identical inputs produce identical results
//! byte for byte, which is what makes adversarial interleavings shippable
//! as fixtures.

mod gbfs;
mod native;
mod queue;
mod recorder;
mod scripts;
mod trace;
mod virt;

pub use queue::TieQueue;
pub use scripts::{
    adversarial_schedule_patho1, adversarial_schedule_patho2, parse_schedule, serialize_schedule,
    ScheduleParseError, ScheduleParseErrorKind,
};
pub use trace::{parse_trace, serialize_trace, CommitKind, EventKind, TraceEvent, TraceParseError};

use crate::topology::{Path, StateId, StateSpace};
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

/// Rule for choosing among equal-h states when a queue is popped.
#[derive(Clone, Debug)]
pub enum TiePolicy {
    /// Oldest insertion first. The default everywhere.
    Fifo,
    /// Newest insertion first.
    Lifo,
    /// Uniform choice among the tied states, from a seeded generator.
    Random(u64),
    /// Explicit choice list. Each consulted tie must name one of the tied
    /// states or the run aborts as misconfigured. Each queue consumes its
    /// own copy of the list.
    Scripted(Arc<Vec<StateId>>),
}

/// Worker interleaving source for the parallel algorithms.
#[derive(Clone, Debug)]
pub enum Backend {
    /// Real threads, real time.
    Native,
    /// Deterministic interpreter; the seed drives a uniform choice among
    /// runnable workers at every step.
    VirtualSeeded(u64),
    /// Deterministic interpreter following an explicit worker-id list, one
    /// id per atomic region.
    VirtualScripted(Arc<Vec<u32>>),
}

/// Resource caps. Exceeding one ends the run with `Outcome::ResourceLimit`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub max_expansions: Option<u64>,
    /// Wall-clock cap, enforced on the native backend only.
    pub max_seconds: Option<f64>,
}

/// Backend plus run plumbing shared by all algorithms.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub backend: Backend,
    /// Cost model for one heuristic evaluation: a busy-spin of this length
    /// on the evaluating thread (native backend only). Zero by default.
    pub eval_delay: Duration,
    pub limits: Limits,
}

impl Schedule {
    pub fn native() -> Self {
        Schedule {
            backend: Backend::Native,
            eval_delay: Duration::ZERO,
            limits: Limits::default(),
        }
    }

    pub fn virtual_seeded(seed: u64) -> Self {
        Schedule {
            backend: Backend::VirtualSeeded(seed),
            eval_delay: Duration::ZERO,
            limits: Limits::default(),
        }
    }

    pub fn virtual_scripted(steps: Vec<u32>) -> Self {
        Schedule {
            backend: Backend::VirtualScripted(Arc::new(steps)),
            eval_delay: Duration::ZERO,
            limits: Limits::default(),
        }
    }

    pub fn with_eval_delay(mut self, d: Duration) -> Self {
        self.eval_delay = d;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Algo {
    Gbfs,
    Kpgbfs,
    PuhfC,
    Obat,
    ObatS,
}

impl Algo {
    pub const ALL: [Algo; 5] = [
        Algo::Gbfs,
        Algo::Kpgbfs,
        Algo::PuhfC,
        Algo::Obat,
        Algo::ObatS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Gbfs => "gbfs",
            Algo::Kpgbfs => "kpgbfs",
            Algo::PuhfC => "puhf-c",
            Algo::Obat => "obat",
            Algo::ObatS => "obat-s",
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gbfs" => Ok(Algo::Gbfs),
            "kpgbfs" => Ok(Algo::Kpgbfs),
            "puhf-c" => Ok(Algo::PuhfC),
            "obat" => Ok(Algo::Obat),
            "obat-s" => Ok(Algo::ObatS),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Solved(Path),
    Exhausted,
    ResourceLimit,
}

impl Outcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, Outcome::Solved(_))
    }
}

/// Everything a finished run reports.
///
/// Counting rules: a state counts as an expansion when it is claimed from
/// Open (successor generation begins); goal claims are not expansions. A
/// state is committed when it leaves Open or Deferred for the last time:
/// an a-state commits at its claim, a b-state at its Deferred pop. Both
/// kinds are completely expanded at commit time, so `completely_expanded`
/// equals the committed count; claimed b-states still sitting in Deferred
/// at termination form `deferred_residual` instead.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub algo: Algo,
    pub k: u32,
    pub outcome: Outcome,
    /// Commit order (by commit sequence number), goals excluded.
    pub committed_order: Vec<StateId>,
    /// Every state claimed from Open in claim order, goals included.
    pub claimed: Vec<StateId>,
    pub expansions: u64,
    pub completely_expanded: u64,
    /// Successor slots processed at generation time, duplicates included.
    pub generated: u64,
    /// Distinct states whose h was computed, the initial state included.
    pub evaluated: u64,
    /// Deferred contents at termination, in queue order.
    pub deferred_residual: Vec<(StateId, f64)>,
    /// Per h-value peak of simultaneous Deferred occupancy.
    pub per_h_deferred_peak: BTreeMap<ordered_float::OrderedFloat<f64>, u64>,
    pub wall_time: Duration,
    pub trace: Vec<TraceEvent>,
}

impl SearchResult {
    pub fn solution(&self) -> Option<&Path> {
        match &self.outcome {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }

    /// Evaluations per second; `None` when no time elapsed (virtual runs).
    pub fn eval_rate(&self) -> Option<f64> {
        let secs = self.wall_time.as_secs_f64();
        (secs > 0.0).then(|| self.evaluated as f64 / secs)
    }
}

/// OBAT's claim-time classification.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LifeCycleTag {
    AState,
    BState,
}

/// b-state iff some successor has strictly lower h; states without
/// successors (goals, dead ends) are a-states.
pub fn classify_state(space: &StateSpace, s: StateId) -> LifeCycleTag {
    if space.succ(s).iter().any(|&u| space.h(u) < space.h(s)) {
        LifeCycleTag::BState
    } else {
        LifeCycleTag::AState
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("schedule script ended at step {step} before the search terminated")]
    ScriptExhausted { step: usize },
    #[error("schedule script names worker {worker} at step {step}, but that worker cannot make progress")]
    ScriptBlockedWorker { step: usize, worker: u32 },
    #[error("schedule script names worker {worker} at step {step}, but only {k} workers exist")]
    ScriptBadWorker { step: usize, worker: u32, k: u32 },
    #[error("tie-breaking script exhausted with ties left to resolve")]
    TieScriptExhausted,
    #[error("tie-breaking script names state {0}, which is not among the tied candidates")]
    TieScriptInvalid(StateId),
}

/// Sequential greedy best-first search.
pub fn gbfs(space: &StateSpace, tie: TiePolicy) -> Result<SearchResult, EngineError> {
    gbfs::run(space, tie, Limits::default())
}

pub fn gbfs_with_limits(
    space: &StateSpace,
    tie: TiePolicy,
    limits: Limits,
) -> Result<SearchResult, EngineError> {
    gbfs::run(space, tie, limits)
}

pub fn kpgbfs(
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    sched: &Schedule,
) -> Result<SearchResult, EngineError> {
    dispatch(Algo::Kpgbfs, space, k, tie, sched)
}

pub fn puhf_c(
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    sched: &Schedule,
) -> Result<SearchResult, EngineError> {
    dispatch(Algo::PuhfC, space, k, tie, sched)
}

pub fn obat(
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    sched: &Schedule,
) -> Result<SearchResult, EngineError> {
    dispatch(Algo::Obat, space, k, tie, sched)
}

pub fn obat_s(
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    sched: &Schedule,
) -> Result<SearchResult, EngineError> {
    dispatch(Algo::ObatS, space, k, tie, sched)
}

/// Uniform entry point for all five algorithms. `k` and the backend are
/// ignored for `gbfs`.
pub fn run(
    algo: Algo,
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    sched: &Schedule,
) -> Result<SearchResult, EngineError> {
    match algo {
        Algo::Gbfs => gbfs::run(space, tie, sched.limits),
        _ => dispatch(algo, space, k, tie, sched),
    }
}

fn dispatch(
    algo: Algo,
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    sched: &Schedule,
) -> Result<SearchResult, EngineError> {
    assert!(k >= 1, "parallel algorithms need at least one worker");
    match &sched.backend {
        Backend::Native => native::run(algo, space, k, tie, sched),
        Backend::VirtualSeeded(seed) => virt::run(
            algo,
            space,
            k,
            tie,
            virt::Driver::Seeded(*seed),
            sched.limits,
        ),
        Backend::VirtualScripted(steps) => virt::run(
            algo,
            space,
            k,
            tie,
            virt::Driver::Scripted(steps.clone()),
            sched.limits,
        ),
    }
}
