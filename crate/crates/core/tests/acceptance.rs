//! Shipped acceptance gates. Runs every numbered criterion in order and
//! prints one verdict line each; a gate fails on a bad result or a blown
//! runtime budget. Run with `-- --nocapture` to see the lines on success.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use pargbfs::analyzer::{bts_states, gbfs_expandable_bruteforce, hwm_all, hwm_bruteforce};
use pargbfs::engine::{
    adversarial_schedule_patho2, gbfs, kpgbfs, obat, obat_s, parse_schedule, puhf_c, Schedule,
    SearchResult, TiePolicy,
};
use pargbfs::topology::{
    gen_patho1, gen_patho2, gen_random, patho1_info, patho2_info, HMode, StateSpace,
};
use pargbfs::verify::{
    check_bts_constrained, check_deferred_bounds, check_expansion_bound, replay_gbfs_validity,
    worst_case_gbfs,
};

fn instance(seed: u64, n: u32, b: u32) -> StateSpace {
    let mode = if seed.is_multiple_of(2) {
        HMode::Layered
    } else {
        HMode::NoisyDistance
    };
    gen_random(seed, n, b, mode)
}

fn gate(n: u32, title: &str, ok: bool, elapsed: Duration, budget_s: f64, detail: &str) -> bool {
    let within = elapsed.as_secs_f64() <= budget_s;
    let verdict = if ok && within { "PASS" } else { "FAIL" };
    let over = if within {
        String::new()
    } else {
        format!("; over {budget_s} s budget")
    };
    println!(
        "criterion {n} ({title}): {verdict} ({detail}; {:.1} s{over})",
        elapsed.as_secs_f64()
    );
    ok && within
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

#[test]
fn acceptance() {
    let mut all = true;

    // 1: recursive hwm against exhaustive path enumeration.
    let t0 = Instant::now();
    let mut agree = 0u32;
    for seed in 0..500u64 {
        let sp = instance(seed, 2 + (seed % 11) as u32, 1 + (seed % 4) as u32);
        let fast = hwm_all(&sp);
        let slow = hwm_bruteforce(&sp).unwrap();
        if sp.states().all(|s| fast.get(s) == slow.get(s)) {
            agree += 1;
        }
    }
    all &= gate(
        1,
        "hwm oracle equivalence",
        agree == 500,
        t0.elapsed(),
        30.0,
        &format!("{agree}/500 instances agree"),
    );

    // 2: bench membership against the enumerated gbfs-expandable set.
    // The sweep is kept for criterion 7.
    let t0 = Instant::now();
    let mut sweep = Vec::new();
    let mut agree = 0u32;
    for seed in 1000..1200u64 {
        let sp = instance(seed, 2 + (seed % 9) as u32, 1 + (seed % 4) as u32);
        if bts_states(&sp) == gbfs_expandable_bruteforce(&sp).unwrap() {
            agree += 1;
        }
        sweep.push(sp);
    }
    all &= gate(
        2,
        "bts set equivalence",
        agree == 200,
        t0.elapsed(),
        120.0,
        &format!("{agree}/200 instances agree"),
    );

    // 3 and 4 share the same runs: every obat / obat_s committed order must
    // replay as a valid sequential expansion order, and every solved run
    // must leave a bounded Deferred behind.
    let t0 = Instant::now();
    let (mut runs, mut valid) = (0u32, 0u32);
    let (mut solved, mut bounded) = (0u32, 0u32);
    for seed in 2000..3000u64 {
        let sp = instance(seed, 10 + (seed % 21) as u32, 2 + (seed % 3) as u32);
        for algo in [obat, obat_s] {
            for k in [2, 4] {
                for vseed in 0..5 {
                    let r =
                        algo(&sp, k, TiePolicy::Fifo, &Schedule::virtual_seeded(vseed)).unwrap();
                    runs += 1;
                    valid += u32::from(replay_gbfs_validity(&sp, &r.committed_order).passed());
                    if r.solution().is_some() {
                        solved += 1;
                        bounded += u32::from(check_deferred_bounds(&r).passed());
                    }
                }
            }
        }
    }
    let replay_elapsed = t0.elapsed();
    all &= gate(
        3,
        "commit-order replay validity",
        valid == runs,
        replay_elapsed,
        300.0,
        &format!("{valid}/{runs} replays valid"),
    );
    all &= gate(
        4,
        "deferred residual bounds",
        bounded == solved && solved > 0,
        replay_elapsed,
        300.0,
        &format!("{bounded}/{solved} solved runs bounded"),
    );

    // 5: the shipped two-worker script forces an unconstrained search to
    // expand every line state of the x=1000 blowup instance, ~3x the
    // sequential worst case, while obat stays within its additive bound.
    let t0 = Instant::now();
    let sp = gen_patho1(1000);
    let info = patho1_info(1000);
    let steps = parse_schedule(include_str!("../fixtures/patho1_x1000_k2.schedule")).unwrap();
    let r = puhf_c(&sp, 2, TiePolicy::Fifo, &Schedule::virtual_scripted(steps)).unwrap();
    let line: BTreeSet<_> = info.line_states.iter().copied().collect();
    let line_expanded = r.claimed.iter().filter(|s| line.contains(s)).count();
    let worst = worst_case_gbfs(&sp).unwrap();
    let ratio = r.expansions as f64 / worst as f64;
    let ob = obat(&sp, 2, TiePolicy::Fifo, &Schedule::virtual_seeded(0)).unwrap();
    let ob_bound = check_expansion_bound(&sp, &ob, Some(worst))
        .unwrap()
        .passed();
    let ok =
        line_expanded >= 3000 && worst == info.worst_case_expansions && ratio >= 2.9 && ob_bound;
    all &= gate(
        5,
        "adversarial blowup on patho1",
        ok,
        t0.elapsed(),
        60.0,
        &format!(
            "{line_expanded} line states, worst {worst}, ratio {ratio:.2}, obat bound {ob_bound}"
        ),
    );

    // 6: on patho2 the adversarial ratio grows with t while obat's slack
    // over the sequential worst case stays additive.
    let t0 = Instant::now();
    let mut ratios = Vec::new();
    let mut worst_ok = true;
    let mut slack_ok = true;
    for t in [2, 4, 8] {
        let sp = gen_patho2(100, t);
        let info = patho2_info(100, t);
        let worst = worst_case_gbfs(&sp).unwrap();
        worst_ok &= worst == info.worst_case_expansions;
        let steps = adversarial_schedule_patho2(100, t);
        let r = puhf_c(&sp, 2, TiePolicy::Fifo, &Schedule::virtual_scripted(steps)).unwrap();
        ratios.push(r.expansions as f64 / worst as f64);
        for vseed in 0..5 {
            let ob = obat(&sp, 2, TiePolicy::Fifo, &Schedule::virtual_seeded(vseed)).unwrap();
            slack_ok &= check_expansion_bound(&sp, &ob, Some(worst))
                .unwrap()
                .passed();
        }
    }
    let increasing = ratios.windows(2).all(|w| w[0] < w[1]);
    all &= gate(
        6,
        "unbounded growth on patho2",
        increasing && worst_ok && slack_ok,
        t0.elapsed(),
        120.0,
        &format!(
            "ratios {:.2} < {:.2} < {:.2}, obat slack bounded {slack_ok}",
            ratios[0], ratios[1], ratios[2]
        ),
    );

    // 7: constrained algorithms never claim outside the bts state set.
    let t0 = Instant::now();
    let (mut runs, mut constrained) = (0u32, 0u32);
    for sp in &sweep {
        for algo in [puhf_c, obat, obat_s] {
            for k in [2, 4] {
                for vseed in 0..3 {
                    let r = algo(sp, k, TiePolicy::Fifo, &Schedule::virtual_seeded(vseed)).unwrap();
                    runs += 1;
                    constrained += u32::from(check_bts_constrained(sp, &r).passed());
                }
            }
        }
    }
    all &= gate(
        7,
        "bts-constrainedness",
        constrained == runs,
        t0.elapsed(),
        120.0,
        &format!("{constrained}/{runs} runs constrained"),
    );

    // 8: farming sibling evaluations out must raise the evaluation rate.
    // Medians absorb scheduler noise; the threshold is loose on purpose.
    let t0 = Instant::now();
    let sp = gen_random(38, 5000, 4, HMode::NoisyDistance);
    let sched = Schedule::native().with_eval_delay(Duration::from_micros(500));
    let rate = |algo: fn(&StateSpace, u32, TiePolicy, &Schedule) -> Result<SearchResult, _>| {
        let rates: Vec<f64> = (0..5)
            .map(|_| {
                algo(&sp, 8, TiePolicy::Fifo, &sched)
                    .unwrap()
                    .eval_rate()
                    .unwrap()
            })
            .collect();
        median(rates)
    };
    let (slow, fast) = (rate(obat), rate(obat_s));
    let ratio = fast / slow;
    all &= gate(
        8,
        "sge evaluation-rate direction",
        ratio > 1.1,
        t0.elapsed(),
        180.0,
        &format!("obat {slow:.0}/s vs obat_s {fast:.0}/s, ratio {ratio:.2}"),
    );

    // 9: with one worker and fifo ties every algorithm degenerates to gbfs.
    let t0 = Instant::now();
    let (mut runs, mut same) = (0u32, 0u32);
    for seed in 4000..4100u64 {
        let sp = instance(seed, 5 + (seed % 16) as u32, 2 + (seed % 3) as u32);
        let base = gbfs(&sp, TiePolicy::Fifo).unwrap();
        for algo in [kpgbfs, puhf_c, obat] {
            let r = algo(&sp, 1, TiePolicy::Fifo, &Schedule::virtual_seeded(0)).unwrap();
            runs += 1;
            same += u32::from(r.committed_order == base.committed_order);
        }
    }
    all &= gate(
        9,
        "single-worker equivalence",
        same == runs,
        t0.elapsed(),
        60.0,
        &format!("{same}/{runs} orders identical"),
    );

    assert!(all, "an acceptance gate failed; see the lines above");
}
