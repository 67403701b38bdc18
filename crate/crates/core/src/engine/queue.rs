//! Priority queue keyed by h with a pluggable tie rule.

use super::{EngineError, TiePolicy};
use crate::topology::StateId;
use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

type Entry = (OrderedFloat<f64>, u64, StateId);

/// Min-h queue. Among equal-h entries, the pop order follows the tie
/// policy: FIFO and LIFO by insertion sequence number, seeded-random by a
/// uniform draw over the tied group, scripted by an explicit choice list
/// (consulted only when two or more entries actually tie).
pub struct TieQueue {
    entries: BTreeSet<Entry>,
    policy: Policy,
}

enum Policy {
    Fifo,
    Lifo,
    Random(Box<ChaCha8Rng>),
    Scripted {
        list: Arc<Vec<StateId>>,
        cursor: usize,
    },
}

impl TieQueue {
    /// `tag` decorrelates the random streams of sibling queues (Open and
    /// Deferred) built from one policy value.
    pub fn new(policy: &TiePolicy, tag: u64) -> Self {
        let policy = match policy {
            TiePolicy::Fifo => Policy::Fifo,
            TiePolicy::Lifo => Policy::Lifo,
            TiePolicy::Random(seed) => Policy::Random(Box::new(ChaCha8Rng::seed_from_u64(
                seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            ))),
            TiePolicy::Scripted(list) => Policy::Scripted {
                list: list.clone(),
                cursor: 0,
            },
        };
        TieQueue {
            entries: BTreeSet::new(),
            policy,
        }
    }

    pub fn push(&mut self, s: StateId, h: f64, seq: u64) {
        self.entries.insert((OrderedFloat(h), seq, s));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// h of the best entry; +inf on an empty queue.
    pub fn min_h(&self) -> f64 {
        self.entries.first().map_or(f64::INFINITY, |e| e.0 .0)
    }

    pub fn pop(&mut self) -> Result<Option<(StateId, f64)>, EngineError> {
        let Some(&(h, first_seq, first_state)) = self.entries.first() else {
            return Ok(None);
        };
        let chosen = match &mut self.policy {
            Policy::Fifo => (h, first_seq, first_state),
            Policy::Lifo => *self
                .entries
                .range((h, 0, StateId(0))..=(h, u64::MAX, StateId(u32::MAX)))
                .next_back()
                .unwrap(),
            Policy::Random(rng) => {
                let group: Vec<Entry> = self
                    .entries
                    .range((h, 0, StateId(0))..=(h, u64::MAX, StateId(u32::MAX)))
                    .copied()
                    .collect();
                group[rng.gen_range(0..group.len())]
            }
            Policy::Scripted { list, cursor } => {
                let group: Vec<Entry> = self
                    .entries
                    .range((h, 0, StateId(0))..=(h, u64::MAX, StateId(u32::MAX)))
                    .copied()
                    .collect();
                if group.len() == 1 {
                    group[0]
                } else {
                    let Some(&want) = list.get(*cursor) else {
                        return Err(EngineError::TieScriptExhausted);
                    };
                    *cursor += 1;
                    *group
                        .iter()
                        .find(|e| e.2 == want)
                        .ok_or(EngineError::TieScriptInvalid(want))?
                }
            }
        };
        self.entries.remove(&chosen);
        Ok(Some((chosen.2, chosen.0 .0)))
    }

    /// Empties the queue in (h, insertion) order.
    pub fn drain_in_order(&mut self) -> Vec<(StateId, f64)> {
        let out = self.entries.iter().map(|&(h, _, s)| (s, h.0)).collect();
        self.entries.clear();
        out
    }
}
