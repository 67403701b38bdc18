//! Sequential greedy best-first search.

use super::queue::TieQueue;
use super::recorder::{Recorder, SeenTable};
use super::{Algo, EngineError, LifeCycleTag, Limits, Outcome, SearchResult, TiePolicy};
use crate::topology::StateSpace;
use std::time::Instant;

pub(crate) fn run(
    space: &StateSpace,
    tie: TiePolicy,
    limits: Limits,
) -> Result<SearchResult, EngineError> {
    let t0 = Instant::now();
    let mut rec = Recorder::new(space);
    let mut seen = SeenTable::new(space);
    let mut open = TieQueue::new(&tie, 0);
    let mut seq = 0u64;

    let init = space.init();
    rec.evaluate(0, init, space.h(init));
    open.push(init, space.h(init), seq);
    seq += 1;

    let outcome = loop {
        if limits
            .max_expansions
            .is_some_and(|cap| rec.expansions >= cap)
        {
            break Outcome::ResourceLimit;
        }
        let Some((s, h)) = open.pop()? else {
            break Outcome::Exhausted;
        };
        let goal = space.is_goal(s);
        let claim_idx = rec.claim(0, s, h, goal);
        if goal {
            break Outcome::Solved(seen.path_to(s));
        }
        rec.generated_slots(space.succ(s).len() as u64);
        for &child in space.succ(s) {
            rec.evaluate(0, child, space.h(child));
            if seen.insert(child, s) {
                open.push(child, space.h(child), seq);
                seq += 1;
                rec.insert(0, child, s);
            }
        }
        rec.commit(0, s, LifeCycleTag::AState, Some(claim_idx), h);
    };

    rec.result_row(&outcome, Algo::Gbfs, 1);
    let expansions = rec.expansions;
    let completely_expanded = rec.committed_count();
    let (generated, evaluated) = (rec.generated, rec.evaluated);
    let (committed_order, claimed, trace, per_h_deferred_peak) = rec.into_parts();
    Ok(SearchResult {
        algo: Algo::Gbfs,
        k: 1,
        outcome,
        committed_order,
        claimed,
        expansions,
        completely_expanded,
        generated,
        evaluated,
        deferred_residual: Vec::new(),
        per_h_deferred_peak,
        wall_time: t0.elapsed(),
        trace,
    })
}
