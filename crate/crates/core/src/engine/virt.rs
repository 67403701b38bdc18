//! Deterministic single-threaded interpreter for the parallel algorithms.
//!
//! The interpreter runs k logical workers. Each scheduler step executes one
//! worker through one atomic region, an unbroken lock-protected span of the
//! algorithm: a selection (claim, Deferred pop, or termination test), an
//! insertion, or one Unevaluated-queue evaluation. Lock-free local work
//! (goal tests, successor generation, classification) is folded into the
//! adjacent region; since it touches only worker-private data, the folding
//! removes no observable interleaving that matters to the recorded events.
//!
//! The driver picks the next worker either from a seeded uniform draw over
//! the workers that can make progress, or from an explicit script. A worker
//! blocked on the expansion constraint (or spinning on an empty queue while
//! others are mid-flight) is not runnable; naming it in a script is an
//! error. A deadlock where no worker is runnable cannot occur: a blocking
//! constraint implies some worker is mid-expansion, and that worker can
//! always run its insertion region.

use super::queue::TieQueue;
use super::recorder::{Recorder, SeenTable};
use super::{Algo, EngineError, LifeCycleTag, Limits, Outcome, SearchResult, TiePolicy};
use crate::topology::{StateId, StateSpace};
use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;
use std::time::Duration;

pub(crate) enum Driver {
    Seeded(u64),
    Scripted(Arc<Vec<u32>>),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Phase {
    /// At the top of the loop, about to run a selection region.
    Select,
    /// Holding a claimed state, about to run its insertion/deferral region.
    Finish(StateId),
}

struct Sim<'a> {
    algo: Algo,
    space: &'a StateSpace,
    k: u32,
    limits: Limits,
    open: TieQueue,
    deferred: TieQueue,
    /// (child, parent) pairs awaiting evaluation (obat-s only).
    uneval: VecDeque<(StateId, StateId)>,
    /// parent -> (unevaluated sibling count, parent claim index).
    pending: BTreeMap<StateId, (usize, u64)>,
    /// Being-expanded h multiset (obat-s).
    be: BTreeMap<OrderedFloat<f64>, u64>,
    /// In-flight h per worker (kpgbfs, puhf-c, obat).
    slots: Vec<Option<f64>>,
    phase: Vec<Phase>,
    claim_idx: Vec<u64>,
    seen: SeenTable,
    rec: Recorder,
    seq: u64,
    outcome: Option<Outcome>,
}

impl<'a> Sim<'a> {
    fn new(algo: Algo, space: &'a StateSpace, k: u32, tie: &TiePolicy, limits: Limits) -> Self {
        let mut sim = Sim {
            algo,
            space,
            k,
            limits,
            open: TieQueue::new(tie, 0),
            deferred: TieQueue::new(tie, 1),
            uneval: VecDeque::new(),
            pending: BTreeMap::new(),
            be: BTreeMap::new(),
            slots: vec![None; k as usize],
            phase: vec![Phase::Select; k as usize],
            claim_idx: vec![0; space.n()],
            seen: SeenTable::new(space),
            rec: Recorder::new(space),
            seq: 0,
            outcome: None,
        };
        let init = space.init();
        sim.rec.evaluate(0, init, space.h(init));
        let seq = sim.next_seq();
        sim.open.push(init, space.h(init), seq);
        sim
    }

    fn next_seq(&mut self) -> u64 {
        let s = self.seq;
        self.seq += 1;
        s
    }

    fn min_in_flight(&self) -> f64 {
        match self.algo {
            Algo::ObatS => self.be.keys().next().map_or(f64::INFINITY, |h| h.0),
            _ => self
                .slots
                .iter()
                .flatten()
                .copied()
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn all_idle(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }

    fn be_add(&mut self, h: f64) {
        *self.be.entry(OrderedFloat(h)).or_insert(0) += 1;
    }

    fn be_remove(&mut self, h: f64) {
        let c = self
            .be
            .get_mut(&OrderedFloat(h))
            .expect("removing tracked in-flight h");
        *c -= 1;
        if *c == 0 {
            self.be.remove(&OrderedFloat(h));
        }
    }

    /// Whether stepping worker `w` right now would make progress.
    fn can_progress(&self, w: u32) -> bool {
        if self.outcome.is_some() {
            return false;
        }
        if self.phase[w as usize] != Phase::Select {
            return true;
        }
        match self.algo {
            Algo::Gbfs => unreachable!("gbfs does not run on the interpreter"),
            Algo::Kpgbfs => {
                if self.open.is_empty() {
                    self.all_idle()
                } else {
                    true
                }
            }
            Algo::PuhfC => {
                if self.open.is_empty() {
                    self.all_idle()
                } else {
                    self.open.min_h() <= self.min_in_flight()
                }
            }
            Algo::Obat => {
                if self.open.is_empty() && self.deferred.is_empty() {
                    self.all_idle()
                } else if self.deferred.min_h() <= self.open.min_h() {
                    self.deferred.min_h() <= self.min_in_flight()
                } else {
                    self.open.min_h() <= self.min_in_flight()
                }
            }
            Algo::ObatS => {
                if !self.uneval.is_empty() {
                    true
                } else if self.open.is_empty() && self.deferred.is_empty() {
                    self.be.is_empty()
                } else if self.deferred.min_h() <= self.open.min_h() {
                    self.deferred.min_h() <= self.min_in_flight()
                } else {
                    self.open.min_h() <= self.min_in_flight()
                }
            }
        }
    }

    /// Runs one atomic region of worker `w`. The caller has checked
    /// `can_progress`.
    fn step(&mut self, w: u32) -> Result<(), EngineError> {
        match self.phase[w as usize] {
            Phase::Finish(s) => self.finish(w, s),
            Phase::Select => match self.algo {
                Algo::Gbfs => unreachable!(),
                Algo::Kpgbfs | Algo::PuhfC => self.select_flat(w),
                Algo::Obat => self.select_obat(w),
                Algo::ObatS => self.step_obat_s(w),
            },
        }
    }

    /// Selection for kpgbfs and puhf-c: claim top(Open) or terminate.
    fn select_flat(&mut self, w: u32) -> Result<(), EngineError> {
        if self.open.is_empty() {
            debug_assert!(self.all_idle());
            self.outcome = Some(Outcome::Exhausted);
            return Ok(());
        }
        if self.algo == Algo::PuhfC {
            assert!(
                self.open.min_h() <= self.min_in_flight(),
                "claim under constraint"
            );
        }
        self.claim_from_open(w)
    }

    fn select_obat(&mut self, w: u32) -> Result<(), EngineError> {
        if self.open.is_empty() && self.deferred.is_empty() {
            debug_assert!(self.all_idle());
            self.outcome = Some(Outcome::Exhausted);
            return Ok(());
        }
        if self.deferred.min_h() <= self.open.min_h() {
            // Deferred wins h ties; the pop happens inside the selection
            // region and the worker stays selection-bound (no in-flight h)
            assert!(self.deferred.min_h() <= self.min_in_flight());
            let (s, h) = self.deferred.pop()?.expect("non-empty deferred");
            self.complete_deferred(w, s, h);
            Ok(())
        } else {
            assert!(self.open.min_h() <= self.min_in_flight());
            self.claim_from_open(w)
        }
    }

    /// Pops top(Open) for worker `w`; handles goal, caps and phase moves.
    fn claim_from_open(&mut self, w: u32) -> Result<(), EngineError> {
        if self
            .limits
            .max_expansions
            .is_some_and(|cap| self.rec.expansions >= cap)
        {
            self.outcome = Some(Outcome::ResourceLimit);
            return Ok(());
        }
        let (s, h) = self.open.pop()?.expect("non-empty open");
        let goal = self.space.is_goal(s);
        let idx = self.rec.claim(w, s, h, goal);
        if goal {
            self.outcome = Some(Outcome::Solved(self.seen.path_to(s)));
            return Ok(());
        }
        self.claim_idx[s.idx()] = idx;
        if self.algo == Algo::ObatS {
            self.be_add(h);
            let succs = self.space.succ(s);
            self.rec.generated_slots(succs.len() as u64);
            if succs.is_empty() {
                self.rec.commit(w, s, LifeCycleTag::AState, Some(idx), h);
                self.be_remove(h);
            } else {
                self.pending.insert(s, (succs.len(), idx));
                for &child in succs {
                    self.uneval.push_back((child, s));
                }
            }
        } else {
            self.slots[w as usize] = Some(h);
            self.phase[w as usize] = Phase::Finish(s);
        }
        Ok(())
    }

    /// Post-claim region for kpgbfs/puhf-c (insert) and obat (classify then
    /// insert or defer).
    fn finish(&mut self, w: u32, s: StateId) -> Result<(), EngineError> {
        let h = self.space.h(s);
        let succs = self.space.succ(s);
        self.rec.generated_slots(succs.len() as u64);
        for &child in succs {
            self.rec.evaluate(w, child, self.space.h(child));
        }
        let defer = self.algo == Algo::Obat && succs.iter().any(|&c| self.space.h(c) < h);
        if defer {
            let seq = self.next_seq();
            self.deferred.push(s, h, seq);
            self.rec.defer(w, s, h);
        } else {
            self.insert_children(w, s);
            self.rec
                .commit(w, s, LifeCycleTag::AState, Some(self.claim_idx[s.idx()]), h);
        }
        self.slots[w as usize] = None;
        self.phase[w as usize] = Phase::Select;
        Ok(())
    }

    fn insert_children(&mut self, w: u32, s: StateId) {
        for &child in self.space.succ(s) {
            if self.seen.insert(child, s) {
                let seq = self.next_seq();
                self.open.push(child, self.space.h(child), seq);
                self.rec.insert(w, child, s);
            }
        }
    }

    /// Deferred pop: the b-state commits here and is completely expanded in
    /// the same region.
    fn complete_deferred(&mut self, w: u32, s: StateId, h: f64) {
        self.rec.commit(w, s, LifeCycleTag::BState, None, h);
        self.insert_children(w, s);
    }

    /// One obat-s region: evaluate if anything is unevaluated, otherwise a
    /// selection (Deferred pop, Open claim, or termination).
    fn step_obat_s(&mut self, w: u32) -> Result<(), EngineError> {
        if let Some((child, parent)) = self.uneval.pop_front() {
            self.rec.evaluate(w, child, self.space.h(child));
            let (left, idx) = {
                let e = self
                    .pending
                    .get_mut(&parent)
                    .expect("pending entry for parent");
                e.0 -= 1;
                *e
            };
            if left == 0 {
                self.pending.remove(&parent);
                let ph = self.space.h(parent);
                let is_b = self
                    .space
                    .succ(parent)
                    .iter()
                    .any(|&c| self.space.h(c) < ph);
                if is_b {
                    let seq = self.next_seq();
                    self.deferred.push(parent, ph, seq);
                    self.rec.defer(w, parent, ph);
                } else {
                    self.insert_children(w, parent);
                    self.rec
                        .commit(w, parent, LifeCycleTag::AState, Some(idx), ph);
                }
                self.be_remove(ph);
            }
            return Ok(());
        }
        if self.open.is_empty() && self.deferred.is_empty() {
            debug_assert!(self.be.is_empty());
            self.outcome = Some(Outcome::Exhausted);
            return Ok(());
        }
        if self.deferred.min_h() <= self.open.min_h() {
            assert!(self.deferred.min_h() <= self.min_in_flight());
            let (s, h) = self.deferred.pop()?.expect("non-empty deferred");
            self.complete_deferred(w, s, h);
            Ok(())
        } else {
            assert!(self.open.min_h() <= self.min_in_flight());
            self.claim_from_open(w)
        }
    }

    fn into_result(mut self) -> SearchResult {
        let outcome = self.outcome.expect("terminated");
        self.rec.result_row(&outcome, self.algo, self.k);
        let expansions = self.rec.expansions;
        let completely_expanded = self.rec.committed_count();
        let (generated, evaluated) = (self.rec.generated, self.rec.evaluated);
        let deferred_residual = self.deferred.drain_in_order();
        let (committed_order, claimed, trace, per_h_deferred_peak) = self.rec.into_parts();
        SearchResult {
            algo: self.algo,
            k: self.k,
            outcome,
            committed_order,
            claimed,
            expansions,
            completely_expanded,
            generated,
            evaluated,
            deferred_residual,
            per_h_deferred_peak,
            wall_time: Duration::ZERO,
            trace,
        }
    }
}

pub(crate) fn run(
    algo: Algo,
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    driver: Driver,
    limits: Limits,
) -> Result<SearchResult, EngineError> {
    let mut sim = Sim::new(algo, space, k, &tie, limits);
    match driver {
        Driver::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while sim.outcome.is_none() {
                let runnable: Vec<u32> = (0..k).filter(|&w| sim.can_progress(w)).collect();
                assert!(!runnable.is_empty(), "some worker can always progress");
                let w = runnable[rng.gen_range(0..runnable.len())];
                sim.step(w)?;
            }
        }
        Driver::Scripted(steps) => {
            let mut cursor = 0usize;
            while sim.outcome.is_none() {
                let Some(&w) = steps.get(cursor) else {
                    return Err(EngineError::ScriptExhausted { step: cursor });
                };
                if w >= k {
                    return Err(EngineError::ScriptBadWorker {
                        step: cursor,
                        worker: w,
                        k,
                    });
                }
                if !sim.can_progress(w) {
                    return Err(EngineError::ScriptBlockedWorker {
                        step: cursor,
                        worker: w,
                    });
                }
                cursor += 1;
                sim.step(w)?;
            }
        }
    }
    Ok(sim.into_result())
}
