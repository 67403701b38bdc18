//! Instance generators.
//!
//! Two pathological families and a seeded random family. All generators are
//! pure functions of their arguments: identical arguments produce identical
//! state spaces, byte for byte after serialization, on any platform.
//!
//! # The pathological families
//!
//! `patho1(x)` is a three-branch gadget. The initial state s0 fans out to two
//! branch heads of equal heuristic value. One head (s11) leads into a line of
//! `x` states that descends to an exit state s31 which jumps back up in h
//! before reaching the goal; the other head (s12) fans out to two more heads
//! (s22, s23), each leading into its own descending line of `x` states and a
//! low exit (s42, s43) just above the goal. Heuristic values are arranged so
//! that:
//!
//! * sequential greedy best-first search commits to exactly one line no
//!   matter how ties are broken (x+3 or x+4 expansions);
//! * a 2-thread search gated only by the "claimed h must not exceed the
//!   minimum in-flight h" rule can be scheduled to expand all three lines
//!   (3x+7 expansions), because s31's high exit value keeps the goal out of
//!   the open list until every line has been drained;
//! * every non-goal state lies on some bench of the bench transition system,
//!   so all of this stays within constraint-legal behavior.
//!
//! `patho2(x, t)` nests the same construction `t` levels deep: each level
//! offers a line of `x` states and a descent into the next level, and the
//! last level offers two lines. Worst-case sequential expansion grows as
//! x + t + 3 while the schedulable parallel expansion grows as (t+2)x + 2t+5,
//! so the ratio between them scales with t. `patho2(x, 1)` is exactly
//! `patho1(x)`.

use super::{StateId, StateRecord, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Heuristic assignment mode for [`gen_random`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HMode {
    /// h = exact goal distance; produces wide plateaus of equal h.
    Layered,
    /// h = goal distance plus small seeded noise; mostly distinct values.
    NoisyDistance,
}

impl std::str::FromStr for HMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "layered" => Ok(HMode::Layered),
            "noisy-distance" => Ok(HMode::NoisyDistance),
            other => Err(format!("unknown h-mode `{other}` (layered|noisy-distance)")),
        }
    }
}

impl std::fmt::Display for HMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HMode::Layered => "layered",
            HMode::NoisyDistance => "noisy-distance",
        })
    }
}

/// Named layout and expansion constants of a `patho1` instance.
#[derive(Clone, Debug)]
pub struct Patho1Info {
    pub x: u32,
    pub states: u32,
    pub s0: StateId,
    pub s11: StateId,
    pub s12: StateId,
    pub s31: StateId,
    pub s22: StateId,
    pub s23: StateId,
    pub s42: StateId,
    pub s43: StateId,
    pub goal: StateId,
    /// The 3x line states across all branches.
    pub line_states: Vec<StateId>,
    /// Expansions of the cheapest sequential run (commits the s11 line).
    pub best_case_expansions: u64,
    /// Expansions of the costliest sequential run (x + 4; the trunk constant
    /// c of the committed branch is 3 for the s11 branch, 4 for the others).
    pub worst_case_expansions: u64,
    /// Expansions of the shipped 2-thread adversarial schedule (3x + 7).
    pub pathological_expansions: u64,
}

/// Layout and expansion constants of a `patho2` instance.
#[derive(Clone, Debug)]
pub struct Patho2Info {
    pub x: u32,
    pub t: u32,
    pub states: u32,
    pub goal: StateId,
    /// Line states of every level, x per pair level plus 2x on the last.
    pub line_states: Vec<StateId>,
    pub best_case_expansions: u64,
    /// x + t + 3.
    pub worst_case_expansions: u64,
    /// (t+2)x + 2t + 5 under the shipped 2-thread adversarial schedule.
    pub pathological_expansions: u64,
}

/// Internal layout of one patho2 build, shared by the info constructors and
/// the adversarial schedule builder in the engine.
pub(crate) struct PathoLayout {
    /// (u_i, line start id, w_i, v_i) per pair level, 1-based level order.
    pub pair_levels: Vec<(u32, u32, u32, u32)>,
    /// (head, line start id, exit) for the two final branches.
    pub finals: [(u32, u32, u32); 2],
    pub goal: u32,
}

pub(crate) fn patho2_layout(x: u32, t: u32) -> PathoLayout {
    assert!(x >= 1, "patho2 requires x >= 1");
    assert!(t >= 1, "patho2 requires t >= 1");
    let mut next = 1u32; // 0 is s0
    let mut pair_levels = Vec::with_capacity(t as usize);
    for _ in 0..t {
        let u = next;
        let line = next + 1;
        let w = line + x;
        let v = w + 1;
        next = v + 1;
        pair_levels.push((u, line, w, v));
    }
    let mut finals = [(0, 0, 0); 2];
    for f in &mut finals {
        let head = next;
        let line = next + 1;
        let w = line + x;
        next = w + 1;
        *f = (head, line, w);
    }
    PathoLayout {
        pair_levels,
        finals,
        goal: next,
    }
}

fn build_patho2(label: String, x: u32, t: u32) -> StateSpace {
    let lay = patho2_layout(x, t);
    let n = lay.goal + 1;
    // band value of level i (1-based): A(i) = x + 2 + (t + 1 - i)
    let band = |i: u32| -> f64 { (x + 2 + (t + 1 - i)) as f64 };
    let mut records = vec![
        StateRecord {
            h: 0.0,
            is_goal: false
        };
        n as usize
    ];
    let mut edges: Vec<(StateId, StateId)> = Vec::new();
    let edge = |a: u32, b: u32, edges: &mut Vec<(StateId, StateId)>| {
        edges.push((StateId(a), StateId(b)));
    };

    records[0].h = band(1);
    for (lvl, &(u, line, w, v)) in lay.pair_levels.iter().enumerate() {
        let i = lvl as u32 + 1;
        records[u as usize].h = band(i);
        records[v as usize].h = band(i);
        // the line starts at the next band value and descends one per state
        for k in 0..x {
            records[(line + k) as usize].h = band(i + 1) - k as f64;
        }
        records[w as usize].h = band(i + 1);
        // parent of this level: s0 for level 1, otherwise v of the level above
        let parent = if i == 1 {
            0
        } else {
            lay.pair_levels[lvl - 1].3
        };
        edge(parent, u, &mut edges);
        edge(parent, v, &mut edges);
        edge(u, line, &mut edges);
        for k in 0..x - 1 {
            edge(line + k, line + k + 1, &mut edges);
        }
        edge(line + x - 1, w, &mut edges);
        edge(w, lay.goal, &mut edges);
    }
    let v_t = lay.pair_levels.last().unwrap().3;
    for &(head, line, w) in &lay.finals {
        records[head as usize].h = band(t + 1);
        for k in 0..x {
            records[(line + k) as usize].h = (x + 1 - k) as f64;
        }
        records[w as usize].h = 1.0;
        edge(v_t, head, &mut edges);
        edge(head, line, &mut edges);
        for k in 0..x - 1 {
            edge(line + k, line + k + 1, &mut edges);
        }
        edge(line + x - 1, w, &mut edges);
        edge(w, lay.goal, &mut edges);
    }
    records[lay.goal as usize] = StateRecord {
        h: 0.0,
        is_goal: true,
    };

    StateSpace::new(label, records, StateId(0), edges)
        .expect("generator output is structurally valid")
}

/// Builds the three-branch pathological gadget with line length `x`.
pub fn gen_patho1(x: u32) -> StateSpace {
    build_patho2(format!("patho1:x={x}"), x, 1)
}

/// Constants of [`gen_patho1`] for downstream checks.
pub fn patho1_info(x: u32) -> Patho1Info {
    let lay = patho2_layout(x, 1);
    let (s11, line_a, s31, s12) = lay.pair_levels[0];
    let (s22, line_b, s42) = lay.finals[0];
    let (s23, line_c, s43) = lay.finals[1];
    let mut line_states = Vec::with_capacity(3 * x as usize);
    for start in [line_a, line_b, line_c] {
        line_states.extend((start..start + x).map(StateId));
    }
    Patho1Info {
        x,
        states: lay.goal + 1,
        s0: StateId(0),
        s11: StateId(s11),
        s12: StateId(s12),
        s31: StateId(s31),
        s22: StateId(s22),
        s23: StateId(s23),
        s42: StateId(s42),
        s43: StateId(s43),
        goal: StateId(lay.goal),
        line_states,
        best_case_expansions: x as u64 + 3,
        worst_case_expansions: x as u64 + 4,
        pathological_expansions: 3 * x as u64 + 7,
    }
}

/// Builds the t-level nested pathological gadget. `t = 1` is `patho1`.
pub fn gen_patho2(x: u32, t: u32) -> StateSpace {
    build_patho2(format!("patho2:x={x}:t={t}"), x, t)
}

/// Constants of [`gen_patho2`] for downstream checks.
pub fn patho2_info(x: u32, t: u32) -> Patho2Info {
    let lay = patho2_layout(x, t);
    let mut line_states = Vec::new();
    for &(_, line, _, _) in &lay.pair_levels {
        line_states.extend((line..line + x).map(StateId));
    }
    for &(_, line, _) in &lay.finals {
        line_states.extend((line..line + x).map(StateId));
    }
    Patho2Info {
        x,
        t,
        states: lay.goal + 1,
        goal: StateId(lay.goal),
        line_states,
        best_case_expansions: x as u64 + 3,
        worst_case_expansions: x as u64 + t as u64 + 3,
        pathological_expansions: (t as u64 + 2) * x as u64 + 2 * t as u64 + 5,
    }
}

/// Generates a connected random state space: a spanning structure rooted at
/// the initial state (id 0), extra forward edges, occasional back edges, and
/// a single goal (id n-1) with heuristic values derived from goal distance.
///
/// Dead-end states (no path to the goal) can occur and are intentional; the
/// goal itself is always reachable from the initial state.
pub fn gen_random(seed: u64, n: u32, max_branch: u32, h_mode: HMode) -> StateSpace {
    assert!(n >= 2, "gen_random requires n >= 2");
    assert!(max_branch >= 1, "gen_random requires max_branch >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goal = n - 1;
    let mut succ: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
    let mut edges: Vec<(StateId, StateId)> = Vec::new();
    let add = |a: u32, b: u32, succ: &mut Vec<Vec<u32>>, edges: &mut Vec<(StateId, StateId)>| {
        succ[a as usize].push(b);
        edges.push((StateId(a), StateId(b)));
    };

    // spanning edges guarantee reachability of every state from id 0;
    // a full parent is skipped by linear probing (capacity always suffices)
    for i in 1..n {
        let r = rng.gen_range(0..i);
        let parent = (0..i)
            .map(|k| (r + k) % i)
            .find(|&p| succ[p as usize].len() < max_branch as usize)
            .expect("some earlier state has spare out-degree");
        add(parent, i, &mut succ, &mut edges);
    }

    // extra edges up to the branch cap, mostly forward, some back edges
    for i in 0..n {
        if i == goal {
            continue;
        }
        let spare = max_branch as usize - succ[i as usize].len();
        if spare == 0 {
            continue;
        }
        let want = rng.gen_range(0..=spare);
        for _ in 0..want {
            for _attempt in 0..4 {
                let back = i > 1 && rng.gen_bool(0.25);
                let j = if back {
                    rng.gen_range(0..i)
                } else if i + 1 < n {
                    rng.gen_range(i + 1..n)
                } else {
                    continue;
                };
                if j != i && !succ[i as usize].contains(&j) {
                    add(i, j, &mut succ, &mut edges);
                    break;
                }
            }
        }
    }

    // goal distance by reverse BFS; unreachable-to-goal states sit one layer
    // above the deepest reachable one
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
    for (a, ts) in succ.iter().enumerate() {
        for &b in ts {
            preds[b as usize].push(a as u32);
        }
    }
    let mut dist = vec![u32::MAX; n as usize];
    dist[goal as usize] = 0;
    let mut queue = std::collections::VecDeque::from([goal]);
    while let Some(v) = queue.pop_front() {
        for &u in &preds[v as usize] {
            if dist[u as usize] == u32::MAX {
                dist[u as usize] = dist[v as usize] + 1;
                queue.push_back(u);
            }
        }
    }
    let max_finite = dist
        .iter()
        .copied()
        .filter(|&d| d != u32::MAX)
        .max()
        .unwrap();

    let mut records = Vec::with_capacity(n as usize);
    for i in 0..n {
        if i == goal {
            records.push(StateRecord {
                h: 0.0,
                is_goal: true,
            });
            continue;
        }
        let base = if dist[i as usize] == u32::MAX {
            max_finite + 1
        } else {
            dist[i as usize]
        };
        let h = match h_mode {
            HMode::Layered => base as f64,
            HMode::NoisyDistance => (base + rng.gen_range(0..=2)) as f64,
        };
        records.push(StateRecord { h, is_goal: false });
    }

    let label = format!("random:seed={seed}:n={n}:b={max_branch}:mode={h_mode}");
    StateSpace::new(label, records, StateId(0), edges)
        .expect("generator output is structurally valid")
}
