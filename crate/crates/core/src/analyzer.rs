//! Exact bench-transition-system analysis.
//!
//! The analyzer computes, for an explicit state space: high-water marks
//! (the lowest ceiling of heuristic values any goal-reaching path from a
//! state must pass under), progress states (states whose expansion strictly
//! lowers that ceiling), benches, and the bench transition system (BTS).
//! The union of all bench states is exactly the set of states some
//! tie-breaking of sequential greedy best-first search can expand, which is
//! what makes the BTS useful as a yardstick for parallel algorithms: a
//! search that never leaves this set can never be blamed for expansions no
//! sequential run could have performed.
//!
//! Two brute-force oracles (`hwm_bruteforce`, `gbfs_expandable_bruteforce`)
//! recompute the same quantities by explicit enumeration on small instances.
//! They exist to cross-validate the exact algorithms and carry hard size
//! guards; they refuse larger inputs instead of running forever.

use crate::topology::{StateId, StateSpace};
use ordered_float::OrderedFloat;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};

/// High-water mark per state; `f64::INFINITY` where no goal is reachable.
#[derive(Clone, Debug, PartialEq)]
pub struct HwmMap {
    values: Vec<f64>,
}

impl HwmMap {
    pub fn get(&self, s: StateId) -> f64 {
        self.values[s.idx()]
    }

    /// hwm of a state set: min over members, +inf for the empty set.
    pub fn of_set<I: IntoIterator<Item = StateId>>(&self, set: I) -> f64 {
        set.into_iter()
            .map(|s| self.get(s))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A set of states, ordered for deterministic iteration.
pub type StateSet = BTreeSet<StateId>;

/// The bench induced by a progress state (or by the initial state, which
/// seeds the BTS regardless of whether it is a progress state).
#[derive(Clone, Debug)]
pub struct Bench {
    pub root: StateId,
    /// hwm of the root's successor set.
    pub level: f64,
    /// Non-progress states with h <= level reachable from the root through
    /// states of the same kind.
    pub inner: StateSet,
    /// Progress states with h == level adjacent to the root or its inner
    /// states.
    pub exit: StateSet,
}

impl Bench {
    /// Root, inner and exit states together.
    pub fn states(&self) -> StateSet {
        let mut all = self.inner.clone();
        all.extend(self.exit.iter().copied());
        all.insert(self.root);
        all
    }
}

/// The bench transition system: benches keyed by root, edges between roots.
#[derive(Clone, Debug)]
pub struct BtsGraph {
    pub vertices: BTreeMap<StateId, Bench>,
    pub edges: BTreeSet<(StateId, StateId)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalyzerError {
    #[error("instance has {n} states, oracle refuses more than {max}")]
    InstanceTooLarge { n: usize, max: usize },
    #[error("state {0} is neither a progress state nor the initial state")]
    NotBenchRoot(StateId),
}

/// Exact high-water marks for every state.
///
/// Bottleneck-path relaxation from the goals over reversed transitions: the
/// value of a path is the maximum h over its states (endpoints included),
/// and each state takes the minimum over its goal-reaching paths. States
/// settle in nondecreasing value order, so each is final when popped.
pub fn hwm_all(space: &StateSpace) -> HwmMap {
    let preds = space.preds();
    let mut values = vec![f64::INFINITY; space.n()];
    let mut heap: BinaryHeap<(std::cmp::Reverse<OrderedFloat<f64>>, StateId)> = BinaryHeap::new();
    for &g in space.goals() {
        values[g.idx()] = 0.0;
        heap.push((std::cmp::Reverse(OrderedFloat(0.0)), g));
    }
    while let Some((std::cmp::Reverse(OrderedFloat(d)), v)) = heap.pop() {
        if d > values[v.idx()] {
            continue;
        }
        for &u in &preds[v.idx()] {
            let cand = f64::max(space.h(u), d);
            if cand < values[u.idx()] {
                values[u.idx()] = cand;
                heap.push((std::cmp::Reverse(OrderedFloat(cand)), u));
            }
        }
    }
    HwmMap { values }
}

const HWM_ORACLE_MAX: usize = 14;

/// High-water marks by explicit enumeration of simple paths to goals.
///
/// Cycles never help a bottleneck minimum (revisiting states can only grow
/// the path maximum), so simple paths suffice. Guarded to small instances.
pub fn hwm_bruteforce(space: &StateSpace) -> Result<HwmMap, AnalyzerError> {
    if space.n() > HWM_ORACLE_MAX {
        return Err(AnalyzerError::InstanceTooLarge {
            n: space.n(),
            max: HWM_ORACLE_MAX,
        });
    }
    fn dfs(space: &StateSpace, v: StateId, path_max: f64, visited: u32, best: &mut f64) {
        if path_max >= *best {
            return;
        }
        if space.is_goal(v) {
            *best = path_max;
            return;
        }
        for &u in space.succ(v) {
            if visited & (1 << u.0) == 0 {
                dfs(
                    space,
                    u,
                    f64::max(path_max, space.h(u)),
                    visited | (1 << u.0),
                    best,
                );
            }
        }
    }
    let mut values = Vec::with_capacity(space.n());
    for s in space.states() {
        let mut best = f64::INFINITY;
        dfs(space, s, space.h(s), 1 << s.0, &mut best);
        values.push(best);
    }
    Ok(HwmMap { values })
}

/// States whose expansion strictly lowers the water level: hwm(s) >
/// hwm(succ(s)), with hwm of an empty set taken as +inf so that
/// successor-less states (goals in particular) never qualify.
pub fn progress_states(space: &StateSpace, hwm: &HwmMap) -> StateSet {
    space
        .states()
        .filter(|&s| hwm.get(s) > hwm.of_set(space.succ(s).iter().copied()))
        .collect()
}

/// The bench induced by `s`, which must be a progress state or the initial
/// state.
pub fn bench_of(space: &StateSpace, s: StateId, hwm: &HwmMap) -> Result<Bench, AnalyzerError> {
    let progress = progress_states(space, hwm);
    bench_of_inner(space, s, hwm, &progress)
}

fn bench_of_inner(
    space: &StateSpace,
    s: StateId,
    hwm: &HwmMap,
    progress: &StateSet,
) -> Result<Bench, AnalyzerError> {
    if !progress.contains(&s) && s != space.init() {
        return Err(AnalyzerError::NotBenchRoot(s));
    }
    let level = hwm.of_set(space.succ(s).iter().copied());
    let qualifies = |u: StateId| u != s && !progress.contains(&u) && space.h(u) <= level;
    let mut inner = StateSet::new();
    let mut frontier: Vec<StateId> = space
        .succ(s)
        .iter()
        .copied()
        .filter(|&u| qualifies(u))
        .collect();
    for &u in &frontier {
        inner.insert(u);
    }
    while let Some(u) = frontier.pop() {
        for &v in space.succ(u) {
            if qualifies(v) && inner.insert(v) {
                frontier.push(v);
            }
        }
    }
    let mut exit = StateSet::new();
    for src in std::iter::once(s).chain(inner.iter().copied()) {
        for &e in space.succ(src) {
            if progress.contains(&e) && space.h(e) == level {
                exit.insert(e);
            }
        }
    }
    Ok(Bench {
        root: s,
        level,
        inner,
        exit,
    })
}

/// The bench transition system: least fixed point of the two rules
/// "the initial state's bench is a vertex" and "every non-goal exit of a
/// vertex roots a vertex, with an edge between them".
pub fn bts(space: &StateSpace) -> BtsGraph {
    let hwm = hwm_all(space);
    let progress = progress_states(space, &hwm);
    let mut vertices: BTreeMap<StateId, Bench> = BTreeMap::new();
    let mut edges: BTreeSet<(StateId, StateId)> = BTreeSet::new();
    let mut worklist = vec![space.init()];
    while let Some(root) = worklist.pop() {
        if vertices.contains_key(&root) {
            continue;
        }
        let bench = bench_of_inner(space, root, &hwm, &progress)
            .expect("worklist roots are init or exits, hence progress states");
        for &e in &bench.exit {
            if !space.is_goal(e) {
                edges.insert((root, e));
                worklist.push(e);
            }
        }
        vertices.insert(root, bench);
    }
    BtsGraph { vertices, edges }
}

/// Union of bench states over all BTS vertices: exactly the states some
/// tie-breaking of sequential GBFS can expand (goal pops included).
pub fn bts_states(space: &StateSpace) -> StateSet {
    let graph = bts(space);
    let mut all = StateSet::new();
    for bench in graph.vertices.values() {
        all.extend(bench.states());
    }
    all
}

const EXPANDABLE_ORACLE_MAX: usize = 10;

/// The GBFS-expandable set by exhaustive tie enumeration.
///
/// Explores every run of sequential GBFS by branching over each minimum-h
/// choice in Open at every step and unioning the popped states (a goal pop
/// terminates its run and counts). Open is a function of the closed set
/// (generated = init plus successors of closed states), so configurations
/// are memoized by closed-set bitmask.
pub fn gbfs_expandable_bruteforce(space: &StateSpace) -> Result<StateSet, AnalyzerError> {
    if space.n() > EXPANDABLE_ORACLE_MAX {
        return Err(AnalyzerError::InstanceTooLarge {
            n: space.n(),
            max: EXPANDABLE_ORACLE_MAX,
        });
    }
    let mut expandable = StateSet::new();
    let mut seen_configs: HashSet<u64> = HashSet::new();
    let mut stack: Vec<u64> = vec![0];
    while let Some(closed) = stack.pop() {
        if !seen_configs.insert(closed) {
            continue;
        }
        let mut open: Vec<StateId> = Vec::new();
        let mut generated = 1u64 << space.init().0;
        for s in space.states() {
            if closed & (1 << s.0) != 0 {
                for &u in space.succ(s) {
                    generated |= 1 << u.0;
                }
            }
        }
        for s in space.states() {
            if generated & (1 << s.0) != 0 && closed & (1 << s.0) == 0 {
                open.push(s);
            }
        }
        let min_h = open
            .iter()
            .map(|&s| space.h(s))
            .fold(f64::INFINITY, f64::min);
        for &s in open.iter().filter(|&&s| space.h(s) == min_h) {
            expandable.insert(s);
            if !space.is_goal(s) {
                stack.push(closed | (1 << s.0));
            }
        }
    }
    Ok(expandable)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::topology::{gen_patho1, gen_patho2, gen_random, patho1_info, HMode, StateRecord};

    /// Chain s0 -> s1 -> ... with the given h values, last state the goal.
    pub(crate) fn chain(hs: &[f64]) -> StateSpace {
        let n = hs.len();
        let records: Vec<StateRecord> = hs
            .iter()
            .enumerate()
            .map(|(i, &h)| StateRecord {
                h,
                is_goal: i == n - 1,
            })
            .collect();
        let edges: Vec<(StateId, StateId)> = (0..n - 1)
            .map(|i| (StateId(i as u32), StateId(i as u32 + 1)))
            .collect();
        StateSpace::new("chain", records, StateId(0), edges).unwrap()
    }

    #[test]
    fn hwm_chain_example() {
        let sp = chain(&[3.0, 5.0, 2.0, 0.0]);
        let hwm = hwm_all(&sp);
        let got: Vec<f64> = sp.states().map(|s| hwm.get(s)).collect();
        assert_eq!(got, vec![5.0, 5.0, 2.0, 0.0]);
        let brute = hwm_bruteforce(&sp).unwrap();
        assert_eq!(hwm, brute);
    }

    #[test]
    fn hwm_dead_end_is_infinite() {
        // s0 -> {dead, goal}; dead has no outgoing transitions
        let records = vec![
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
        ];
        let sp = StateSpace::new(
            "deadend",
            records,
            StateId(0),
            vec![(StateId(0), StateId(1)), (StateId(0), StateId(2))],
        )
        .unwrap();
        let hwm = hwm_all(&sp);
        assert_eq!(hwm.get(StateId(1)), f64::INFINITY);
        assert_eq!(hwm.get(StateId(0)), 2.0);
        assert_eq!(hwm.get(StateId(2)), 0.0);
        assert_eq!(hwm_bruteforce(&sp).unwrap(), hwm);
    }

    #[test]
    fn hwm_bruteforce_guard() {
        let sp = gen_random(3, 15, 3, HMode::Layered);
        assert_eq!(
            hwm_bruteforce(&sp).unwrap_err(),
            AnalyzerError::InstanceTooLarge { n: 15, max: 14 }
        );
    }

    #[test]
    fn progress_chain_example() {
        let sp = chain(&[3.0, 5.0, 2.0, 0.0]);
        let hwm = hwm_all(&sp);
        let prog = progress_states(&sp, &hwm);
        // s1: hwm 5 over successor hwm 2; s2: 2 over 0; s0: 5 over 5 fails;
        // the goal has no successors, hwm of the empty set is +inf
        assert_eq!(prog, StateSet::from([StateId(1), StateId(2)]));
    }

    #[test]
    fn equal_successor_hwm_is_not_progress() {
        let sp = chain(&[5.0, 5.0, 0.0]);
        let hwm = hwm_all(&sp);
        assert!(!progress_states(&sp, &hwm).contains(&StateId(0)));
    }

    #[test]
    fn bench_root_all_exits() {
        // init -> a(h1) -> goal: a is a progress state at the init bench level
        let sp = chain(&[1.0, 1.0, 0.0]);
        let hwm = hwm_all(&sp);
        let b = bench_of(&sp, StateId(0), &hwm).unwrap();
        assert_eq!(b.level, 1.0);
        assert!(b.inner.is_empty());
        assert_eq!(b.exit, StateSet::from([StateId(1)]));
        assert_eq!(b.states(), StateSet::from([StateId(0), StateId(1)]));
    }

    #[test]
    fn bench_of_rejects_plain_states() {
        let sp = chain(&[3.0, 5.0, 2.0, 0.0]);
        let hwm = hwm_all(&sp);
        // the goal is neither init nor a progress state
        assert_eq!(
            bench_of(&sp, StateId(3), &hwm).unwrap_err(),
            AnalyzerError::NotBenchRoot(StateId(3))
        );
    }

    #[test]
    fn bench_exits_hold_invariants() {
        for seed in 0..40 {
            let sp = gen_random(
                seed,
                12,
                3,
                if seed % 2 == 0 {
                    HMode::Layered
                } else {
                    HMode::NoisyDistance
                },
            );
            let hwm = hwm_all(&sp);
            let prog = progress_states(&sp, &hwm);
            let graph = bts(&sp);
            for bench in graph.vertices.values() {
                for e in &bench.exit {
                    assert!(prog.contains(e));
                    assert_eq!(sp.h(*e), bench.level);
                }
                for i in &bench.inner {
                    assert!(!prog.contains(i));
                    assert!(sp.h(*i) <= bench.level);
                }
            }
        }
    }

    #[test]
    fn minimal_instance_bts() {
        let sp = gen_random(1, 2, 1, HMode::Layered);
        let graph = bts(&sp);
        assert_eq!(graph.vertices.len(), 1);
        assert!(graph.edges.is_empty());
        assert_eq!(bts_states(&sp), StateSet::from([StateId(0), StateId(1)]));
    }

    #[test]
    fn patho1_bench_structure() {
        let info = patho1_info(1);
        let sp = gen_patho1(1);
        let hwm = hwm_all(&sp);
        let b0 = bench_of(&sp, info.s0, &hwm).unwrap();
        assert_eq!(b0.exit, StateSet::from([info.s11, info.s12]));
        let graph = bts(&sp);
        assert!(graph.vertices.contains_key(&info.s11));
        assert!(graph.vertices.contains_key(&info.s12));
        assert!(graph.edges.contains(&(info.s0, info.s11)));
        assert!(graph.edges.contains(&(info.s0, info.s12)));
    }

    #[test]
    fn patho_families_are_fully_bts_covered() {
        for sp in [
            gen_patho1(1),
            gen_patho1(4),
            gen_patho2(3, 2),
            gen_patho2(2, 4),
        ] {
            let members = bts_states(&sp);
            for s in sp.states() {
                assert!(members.contains(&s), "{} missing {s}", sp.label);
            }
        }
    }

    #[test]
    fn expandable_no_ties_is_single_run() {
        let sp = chain(&[3.0, 2.0, 1.0, 0.0]);
        let set = gbfs_expandable_bruteforce(&sp).unwrap();
        assert_eq!(set, (0..4).map(StateId).collect::<StateSet>());
        assert!(set.contains(&sp.init()));
    }

    #[test]
    fn expandable_guard() {
        let sp = gen_random(5, 11, 3, HMode::Layered);
        assert!(matches!(
            gbfs_expandable_bruteforce(&sp),
            Err(AnalyzerError::InstanceTooLarge { n: 11, max: 10 })
        ));
    }

    #[test]
    fn bts_set_matches_oracle_on_small_sweep() {
        for seed in 0..50 {
            let n = 3 + (seed % 8) as u32;
            let sp = gen_random(
                seed,
                n,
                3,
                if seed % 2 == 0 {
                    HMode::Layered
                } else {
                    HMode::NoisyDistance
                },
            );
            let exact = bts_states(&sp);
            let oracle = gbfs_expandable_bruteforce(&sp).unwrap();
            assert_eq!(exact, oracle, "seed {seed} label {}", sp.label);
        }
    }

    #[test]
    fn hwm_oracle_small_sweep() {
        for seed in 0..60 {
            let n = 2 + (seed % 13) as u32;
            let sp = gen_random(seed, n, 4, HMode::NoisyDistance);
            assert_eq!(hwm_all(&sp), hwm_bruteforce(&sp).unwrap(), "seed {seed}");
        }
    }
}
