//! Explicit state-space topologies.
//!
//! A topology is a finite directed state space with one initial state, at
//! least one goal state, and a finite nonnegative heuristic value per state.
//! Goal states have no outgoing transitions and heuristic zero. Successor
//! lists are ordered; the order is part of the topology (it fixes insertion
//! order, and with it FIFO tie-breaking behavior downstream).

mod format;
mod gen;

pub use format::{parse_topology, serialize_topology, ParseError, ParseErrorKind};
pub use gen::{
    gen_patho1, gen_patho2, gen_random, patho1_info, patho2_info, HMode, Patho1Info, Patho2Info,
};

use std::fmt;

/// Dense 0-based index of a state within its [`StateSpace`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(pub u32);

impl StateId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Per-state data: heuristic value and goal flag.
///
/// `is_goal` implies `h == 0.0`. The heuristic is expected to be finite and
/// nonnegative; negative values survive parsing so that [`validate`] can
/// report them as data rather than hard errors.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct StateRecord {
    pub h: f64,
    pub is_goal: bool,
}

/// An explicit state space.
///
/// Structural invariants (enforced by [`StateSpace::new`] and the parser):
/// exactly one initial state, at least one goal, goals have no successors and
/// `h = 0`, no self-loops, no duplicate transitions, all ids in range.
#[derive(Clone, Debug)]
pub struct StateSpace {
    /// Advisory instance name. Not part of the serialized format and ignored
    /// by structural equality.
    pub label: String,
    records: Vec<StateRecord>,
    init: StateId,
    goals: Vec<StateId>,
    succ: Vec<Vec<StateId>>,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
            && self.init == other.init
            && self.goals == other.goals
            && self.succ == other.succ
    }
}

/// Structural violations rejected at construction time.
#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum TopologyError {
    #[error("state space has no states")]
    Empty,
    #[error("state {0} used as transition endpoint but not declared")]
    UnknownId(u32),
    #[error("goal state {0} has an outgoing transition")]
    GoalHasSuccessor(u32),
    #[error("goal state {0} has nonzero heuristic")]
    GoalNonzeroH(u32),
    #[error("state {0} has a self-loop")]
    SelfLoop(u32),
    #[error("duplicate transition {0} -> {1}")]
    DuplicateEdge(u32, u32),
    #[error("no goal state declared")]
    MissingGoal,
    #[error("heuristic of state {0} is not finite")]
    NonFiniteH(u32),
}

impl StateSpace {
    /// Builds a state space from records, an initial state, and ordered
    /// transition lists, checking the structural invariants.
    pub fn new(
        label: impl Into<String>,
        records: Vec<StateRecord>,
        init: StateId,
        edges: Vec<(StateId, StateId)>,
    ) -> Result<Self, TopologyError> {
        if records.is_empty() {
            return Err(TopologyError::Empty);
        }
        let n = records.len() as u32;
        if init.0 >= n {
            return Err(TopologyError::UnknownId(init.0));
        }
        let mut goals = Vec::new();
        for (i, r) in records.iter().enumerate() {
            if !r.h.is_finite() {
                return Err(TopologyError::NonFiniteH(i as u32));
            }
            if r.is_goal {
                if r.h != 0.0 {
                    return Err(TopologyError::GoalNonzeroH(i as u32));
                }
                goals.push(StateId(i as u32));
            }
        }
        if goals.is_empty() {
            return Err(TopologyError::MissingGoal);
        }
        let mut succ = vec![Vec::new(); records.len()];
        let mut seen = std::collections::HashSet::new();
        for (from, to) in edges {
            if from.0 >= n {
                return Err(TopologyError::UnknownId(from.0));
            }
            if to.0 >= n {
                return Err(TopologyError::UnknownId(to.0));
            }
            if from == to {
                return Err(TopologyError::SelfLoop(from.0));
            }
            if records[from.idx()].is_goal {
                return Err(TopologyError::GoalHasSuccessor(from.0));
            }
            if !seen.insert((from, to)) {
                return Err(TopologyError::DuplicateEdge(from.0, to.0));
            }
            succ[from.idx()].push(to);
        }
        Ok(StateSpace {
            label: label.into(),
            records,
            init,
            goals,
            succ,
        })
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn init(&self) -> StateId {
        self.init
    }

    /// Goal states in id order.
    pub fn goals(&self) -> &[StateId] {
        &self.goals
    }

    pub fn h(&self, s: StateId) -> f64 {
        self.records[s.idx()].h
    }

    pub fn is_goal(&self, s: StateId) -> bool {
        self.records[s.idx()].is_goal
    }

    pub fn succ(&self, s: StateId) -> &[StateId] {
        &self.succ[s.idx()]
    }

    pub fn record(&self, s: StateId) -> StateRecord {
        self.records[s.idx()]
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.records.len() as u32).map(StateId)
    }

    /// Reverse adjacency, computed on demand.
    pub fn preds(&self) -> Vec<Vec<StateId>> {
        let mut p = vec![Vec::new(); self.n()];
        for s in self.states() {
            for &t in self.succ(s) {
                p[t.idx()].push(s);
            }
        }
        p
    }

    /// States reachable from `init` by forward transitions.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![self.init];
        seen[self.init.idx()] = true;
        while let Some(s) = stack.pop() {
            for &t in self.succ(s) {
                if !seen[t.idx()] {
                    seen[t.idx()] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// A directed path through a state space. `len()` counts states, not edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Path {
    pub states: Vec<StateId>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Checks that consecutive states are connected and endpoints match
    /// init/goal of `space`.
    pub fn is_solution(&self, space: &StateSpace) -> bool {
        if self.states.is_empty() {
            return false;
        }
        if self.states[0] != space.init() || !space.is_goal(*self.states.last().unwrap()) {
            return false;
        }
        self.states
            .windows(2)
            .all(|w| space.succ(w[0]).contains(&w[1]))
    }
}

/// A single assumption violation found by [`validate`].
#[derive(Clone, PartialEq, Debug)]
pub enum Violation {
    /// No goal state is reachable from the initial state.
    GoalUnreachable,
    /// States unreachable from the initial state.
    UnreachableStates(Vec<StateId>),
    /// Non-goal states with negative heuristic values.
    NegativeH(Vec<StateId>),
}

/// Result of [`validate`]; empty means every base assumption holds.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_goal_unreachable(&self) -> bool {
        self.violations
            .iter()
            .any(|v| matches!(v, Violation::GoalUnreachable))
    }
}

/// Checks the base assumptions that the analyzers and engines rely on:
/// a reachable goal, no unreachable states, no negative heuristics.
/// Violations are reported as data; none of them are fatal here.
pub fn validate(space: &StateSpace) -> ValidationReport {
    let mut violations = Vec::new();
    let reach = space.reachable();
    if !space.goals().iter().any(|g| reach[g.idx()]) {
        violations.push(Violation::GoalUnreachable);
    }
    let unreachable: Vec<StateId> = space.states().filter(|s| !reach[s.idx()]).collect();
    if !unreachable.is_empty() {
        violations.push(Violation::UnreachableStates(unreachable));
    }
    let negative: Vec<StateId> = space.states().filter(|s| space.h(*s) < 0.0).collect();
    if !negative.is_empty() {
        violations.push(Violation::NegativeH(negative));
    }
    ValidationReport { violations }
}
