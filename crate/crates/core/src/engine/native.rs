//! Thread-per-worker backend.
//!
//! The shared search state is split by access pattern. Everything touched
//! by a selection decision (the two queues, in-flight h bookkeeping and the
//! Closed table) lives under one selection mutex, so a selection is exactly
//! as atomic as the algorithms require. The Unevaluated queue has its own
//! lock so evaluators never contend with claimers, and the recorder is a
//! leaf lock taken briefly from anywhere. Heuristic evaluation, the only
//! deliberately slow operation, runs with no lock held.
//!
//! Lock order: selection, then unevaluated, then recorder. The outcome and
//! error cells are leaves written once, guarded by the stop flag.

use super::queue::TieQueue;
use super::recorder::{Recorder, SeenTable};
use super::{Algo, EngineError, LifeCycleTag, Outcome, Schedule, SearchResult, TiePolicy};
use crate::topology::{StateId, StateSpace};
use ordered_float::OrderedFloat;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

struct Sel {
    open: TieQueue,
    deferred: TieQueue,
    seq: u64,
    /// In-flight h per worker (kpgbfs, puhf-c, obat).
    slots: Vec<Option<f64>>,
    /// Being-expanded h multiset (obat-s).
    be: BTreeMap<OrderedFloat<f64>, u64>,
    seen: SeenTable,
}

impl Sel {
    fn next_seq(&mut self) -> u64 {
        let s = self.seq;
        self.seq += 1;
        s
    }

    fn min_in_flight(&self, algo: Algo) -> f64 {
        match algo {
            Algo::ObatS => self.be.keys().next().map_or(f64::INFINITY, |h| h.0),
            _ => self
                .slots
                .iter()
                .flatten()
                .copied()
                .fold(f64::INFINITY, f64::min),
        }
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
}

struct Pending {
    left: usize,
    claim_idx: u64,
}

#[derive(Default)]
struct Uneval {
    queue: VecDeque<(StateId, StateId)>,
    pending: HashMap<StateId, Pending>,
}

struct Shared<'a> {
    space: &'a StateSpace,
    algo: Algo,
    sel: Mutex<Sel>,
    uneval: Mutex<Uneval>,
    rec: Mutex<Recorder>,
    outcome: Mutex<Option<Outcome>>,
    error: Mutex<Option<EngineError>>,
    stop: AtomicBool,
    eval_delay: Duration,
    cap: Option<u64>,
    deadline: Option<Instant>,
}

enum Step {
    /// Claimed a state; evaluation and the finish region are the caller's.
    Claimed(StateId, f64, u64),
    /// Progressed entirely inside the selection region.
    Progress,
    /// Blocked; back off and retry.
    Idle,
    Done,
}

impl<'a> Shared<'a> {
    fn finish_outcome(&self, outcome: Outcome) {
        let mut slot = self.outcome.lock().unwrap();
        if slot.is_none() {
            *slot = Some(outcome);
        }
        self.stop.store(true, Ordering::Release);
    }

    fn fail(&self, e: EngineError) {
        let mut slot = self.error.lock().unwrap();
        if slot.is_none() {
            *slot = Some(e);
        }
        self.stop.store(true, Ordering::Release);
    }

    /// First-toucher evaluation with the configured cost model; duplicate
    /// touches return immediately.
    fn evaluate(&self, w: u32, s: StateId) {
        if !self.rec.lock().unwrap().try_begin_eval(s) {
            return;
        }
        if !self.eval_delay.is_zero() {
            let t0 = Instant::now();
            while t0.elapsed() < self.eval_delay {
                std::hint::spin_loop();
                std::thread::yield_now();
            }
        }
        self.rec.lock().unwrap().finish_eval(w, s, self.space.h(s));
    }

    fn insert_children(&self, sel: &mut Sel, w: u32, s: StateId) {
        for &child in self.space.succ(s) {
            if sel.seen.insert(child, s) {
                let seq = sel.next_seq();
                sel.open.push(child, self.space.h(child), seq);
                self.rec.lock().unwrap().insert(w, child, s);
            }
        }
    }

    fn complete_deferred(&self, sel: &mut Sel, w: u32, s: StateId, h: f64) {
        self.rec
            .lock()
            .unwrap()
            .commit(w, s, LifeCycleTag::BState, None, h);
        self.insert_children(sel, w, s);
    }

    /// One selection attempt under the selection lock.
    fn try_select(&self, w: u32) -> Step {
        let mut sel = self.sel.lock().unwrap();
        if self.stop.load(Ordering::Acquire) {
            return Step::Done;
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.finish_outcome(Outcome::ResourceLimit);
            return Step::Done;
        }
        match self.algo {
            Algo::Gbfs => unreachable!("gbfs does not run on the native backend"),
            Algo::Kpgbfs | Algo::PuhfC => {
                if sel.open.is_empty() {
                    if sel.slots.iter().all(Option::is_none) {
                        self.finish_outcome(Outcome::Exhausted);
                        return Step::Done;
                    }
                    return Step::Idle;
                }
                if self.algo == Algo::PuhfC && sel.open.min_h() > sel.min_in_flight(self.algo) {
                    return Step::Idle;
                }
                self.claim(&mut sel, w)
            }
            Algo::Obat | Algo::ObatS => {
                let min_flight = sel.min_in_flight(self.algo);
                if sel.open.is_empty() && sel.deferred.is_empty() {
                    let drained = match self.algo {
                        Algo::ObatS => sel.be.is_empty(),
                        _ => sel.slots.iter().all(Option::is_none),
                    };
                    if drained {
                        self.finish_outcome(Outcome::Exhausted);
                        return Step::Done;
                    }
                    return Step::Idle;
                }
                if sel.deferred.min_h() <= sel.open.min_h() {
                    if sel.deferred.min_h() > min_flight {
                        return Step::Idle;
                    }
                    match sel.deferred.pop() {
                        Ok(Some((s, h))) => {
                            self.complete_deferred(&mut sel, w, s, h);
                            Step::Progress
                        }
                        Ok(None) => unreachable!("non-empty deferred"),
                        Err(e) => {
                            self.fail(e);
                            Step::Done
                        }
                    }
                } else {
                    if sel.open.min_h() > min_flight {
                        return Step::Idle;
                    }
                    self.claim(&mut sel, w)
                }
            }
        }
    }

    /// Pops top(Open) and runs the worker-local part of the claim that must
    /// stay inside the selection region.
    fn claim(&self, sel: &mut MutexGuard<'_, Sel>, w: u32) -> Step {
        if self
            .cap
            .is_some_and(|c| self.rec.lock().unwrap().expansions >= c)
        {
            self.finish_outcome(Outcome::ResourceLimit);
            return Step::Done;
        }
        let (s, h) = match sel.open.pop() {
            Ok(Some(p)) => p,
            Ok(None) => unreachable!("non-empty open"),
            Err(e) => {
                self.fail(e);
                return Step::Done;
            }
        };
        let goal = self.space.is_goal(s);
        let idx = self.rec.lock().unwrap().claim(w, s, h, goal);
        if goal {
            let path = sel.seen.path_to(s);
            self.finish_outcome(Outcome::Solved(path));
            return Step::Done;
        }
        if self.algo == Algo::ObatS {
            sel.be_add(h);
            let succs = self.space.succ(s);
            self.rec.lock().unwrap().generated_slots(succs.len() as u64);
            if succs.is_empty() {
                self.rec
                    .lock()
                    .unwrap()
                    .commit(w, s, LifeCycleTag::AState, Some(idx), h);
                sel.be_remove(h);
            } else {
                let mut u = self.uneval.lock().unwrap();
                u.pending.insert(
                    s,
                    Pending {
                        left: succs.len(),
                        claim_idx: idx,
                    },
                );
                for &child in succs {
                    u.queue.push_back((child, s));
                }
            }
            Step::Progress
        } else {
            sel.slots[w as usize] = Some(h);
            Step::Claimed(s, h, idx)
        }
    }

    /// Post-evaluation region of an Open claim: classify (obat), insert or
    /// defer, release the in-flight slot.
    fn finish_claim(&self, w: u32, s: StateId, h: f64, idx: u64) {
        let mut sel = self.sel.lock().unwrap();
        let succs = self.space.succ(s);
        self.rec.lock().unwrap().generated_slots(succs.len() as u64);
        let defer = self.algo == Algo::Obat && succs.iter().any(|&c| self.space.h(c) < h);
        if defer {
            let seq = sel.next_seq();
            sel.deferred.push(s, h, seq);
            self.rec.lock().unwrap().defer(w, s, h);
        } else {
            self.insert_children(&mut sel, w, s);
            self.rec
                .lock()
                .unwrap()
                .commit(w, s, LifeCycleTag::AState, Some(idx), h);
        }
        sel.slots[w as usize] = None;
    }

    /// Sibling-set bookkeeping after one obat-s evaluation; classifies and
    /// commits or defers the parent when its last successor is done.
    fn after_evaluation(&self, w: u32, parent: StateId) {
        let finished = {
            let mut u = self.uneval.lock().unwrap();
            let p = u
                .pending
                .get_mut(&parent)
                .expect("pending entry for parent");
            p.left -= 1;
            if p.left == 0 {
                let idx = p.claim_idx;
                u.pending.remove(&parent);
                Some(idx)
            } else {
                None
            }
        };
        let Some(idx) = finished else { return };
        let mut sel = self.sel.lock().unwrap();
        let ph = self.space.h(parent);
        let is_b = self
            .space
            .succ(parent)
            .iter()
            .any(|&c| self.space.h(c) < ph);
        if is_b {
            let seq = sel.next_seq();
            sel.deferred.push(parent, ph, seq);
            self.rec.lock().unwrap().defer(w, parent, ph);
        } else {
            self.insert_children(&mut sel, w, parent);
            self.rec
                .lock()
                .unwrap()
                .commit(w, parent, LifeCycleTag::AState, Some(idx), ph);
        }
        sel.be_remove(ph);
    }
}

fn worker(sh: &Shared<'_>, w: u32) {
    loop {
        if sh.stop.load(Ordering::Acquire) {
            return;
        }
        if sh.algo == Algo::ObatS {
            let popped = sh.uneval.lock().unwrap().queue.pop_front();
            if let Some((child, parent)) = popped {
                sh.evaluate(w, child);
                sh.after_evaluation(w, parent);
                continue;
            }
        }
        match sh.try_select(w) {
            Step::Claimed(s, h, idx) => {
                for &child in sh.space.succ(s) {
                    sh.evaluate(w, child);
                }
                sh.finish_claim(w, s, h, idx);
            }
            Step::Progress => {}
            Step::Idle => std::thread::yield_now(),
            Step::Done => return,
        }
    }
}

pub(crate) fn run(
    algo: Algo,
    space: &StateSpace,
    k: u32,
    tie: TiePolicy,
    sched: &Schedule,
) -> Result<SearchResult, EngineError> {
    let t0 = Instant::now();
    let mut sel = Sel {
        open: TieQueue::new(&tie, 0),
        deferred: TieQueue::new(&tie, 1),
        seq: 0,
        slots: vec![None; k as usize],
        be: BTreeMap::new(),
        seen: SeenTable::new(space),
    };
    let mut rec = Recorder::new(space);
    let init = space.init();
    rec.evaluate(0, init, space.h(init));
    let seq = sel.next_seq();
    sel.open.push(init, space.h(init), seq);

    let shared = Shared {
        space,
        algo,
        sel: Mutex::new(sel),
        uneval: Mutex::new(Uneval::default()),
        rec: Mutex::new(rec),
        outcome: Mutex::new(None),
        error: Mutex::new(None),
        stop: AtomicBool::new(false),
        eval_delay: sched.eval_delay,
        cap: sched.limits.max_expansions,
        deadline: sched
            .limits
            .max_seconds
            .map(|s| t0 + Duration::from_secs_f64(s)),
    };
    std::thread::scope(|scope| {
        for w in 0..k {
            let sh = &shared;
            scope.spawn(move || worker(sh, w));
        }
    });
    let wall_time = t0.elapsed();

    if let Some(e) = shared.error.into_inner().unwrap() {
        return Err(e);
    }
    let outcome = shared
        .outcome
        .into_inner()
        .unwrap()
        .expect("terminated with an outcome");
    let mut rec = shared.rec.into_inner().unwrap();
    rec.result_row(&outcome, algo, k);
    let mut sel = shared.sel.into_inner().unwrap();
    let expansions = rec.expansions;
    let completely_expanded = rec.committed_count();
    let (generated, evaluated) = (rec.generated, rec.evaluated);
    let deferred_residual = sel.deferred.drain_in_order();
    let (committed_order, claimed, trace, per_h_deferred_peak) = rec.into_parts();
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
        per_h_deferred_peak,
        wall_time,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{gbfs, obat, obat_s, run as engine_run, Schedule};
    use super::*;
    use crate::topology::{gen_patho1, gen_random, HMode};

    #[test]
    fn solves_across_algorithms_and_widths() {
        let sp = gen_random(4, 60, 3, HMode::NoisyDistance);
        let expected = gbfs(&sp, TiePolicy::Fifo).unwrap().outcome.is_solved();
        for algo in [Algo::Kpgbfs, Algo::PuhfC, Algo::Obat, Algo::ObatS] {
            for k in [1, 2, 4] {
                let r = engine_run(algo, &sp, k, TiePolicy::Fifo, &Schedule::native()).unwrap();
                assert_eq!(r.outcome.is_solved(), expected, "{algo} k={k}");
                assert!(r.wall_time > Duration::ZERO);
            }
        }
    }

    #[test]
    fn native_k1_obat_matches_virtual_committed_order() {
        let sp = gen_patho1(8);
        let native = obat(&sp, 1, TiePolicy::Fifo, &Schedule::native()).unwrap();
        let virt = obat(&sp, 1, TiePolicy::Fifo, &Schedule::virtual_seeded(0)).unwrap();
        assert_eq!(native.committed_order, virt.committed_order);
        assert_eq!(native.expansions, virt.expansions);
    }

    #[test]
    fn expansion_cap_holds_under_contention() {
        let sp = gen_random(9, 400, 4, HMode::Layered);
        let sched = Schedule::native().with_limits(super::super::Limits {
            max_expansions: Some(20),
            max_seconds: None,
        });
        for algo in [Algo::Kpgbfs, Algo::Obat, Algo::ObatS] {
            let r = engine_run(algo, &sp, 4, TiePolicy::Fifo, &sched).unwrap();
            if r.outcome == Outcome::ResourceLimit {
                assert_eq!(r.expansions, 20, "{algo}");
            } else {
                assert!(r.expansions <= 20, "{algo}");
            }
        }
    }

    #[test]
    fn eval_delay_is_observable_in_wall_time() {
        let sp = gen_random(2, 30, 3, HMode::NoisyDistance);
        let sched = Schedule::native().with_eval_delay(Duration::from_micros(200));
        let r = obat_s(&sp, 2, TiePolicy::Fifo, &sched).unwrap();
        assert!(r.outcome.is_solved());
        assert!(r.eval_rate().is_some());
        // every distinct evaluation paid the model cost at least once
        assert!(r.wall_time >= Duration::from_micros(200));
    }

    #[test]
    fn exhausts_unsolvable_spaces() {
        use crate::topology::StateRecord;
        // init -> a; goal unreachable
        let sp = crate::topology::StateSpace::new(
            "island",
            vec![
                StateRecord {
                    h: 2.0,
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
            ],
            StateId(0),
            vec![(StateId(0), StateId(1))],
        )
        .unwrap();
        for algo in [Algo::Kpgbfs, Algo::PuhfC, Algo::Obat, Algo::ObatS] {
            let r = engine_run(algo, &sp, 3, TiePolicy::Fifo, &Schedule::native()).unwrap();
            assert_eq!(r.outcome, Outcome::Exhausted, "{algo}");
            assert_eq!(r.expansions, 2, "{algo}");
        }
    }
}
