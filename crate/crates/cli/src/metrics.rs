//! The frozen CSV surfaces: metrics rows, coverage summaries, and the
//! paired scatter tables plotdata derives from them. Each block opens with
//! a version line so the formats can only ever grow.

use pargbfs::engine::{Outcome, SearchResult};
use std::collections::BTreeMap;
use std::fmt::Write;

pub const METRICS_VERSION: &str = "metrics v1";
pub const METRICS_HEADER: &str = "instance,algorithm,k,seed,outcome,expansions,\
completely_expanded,deferred_residual_size,evaluated,eval_rate,wall_time,solution_length";

pub const PAIR_METRICS: [&str; 3] = ["expansions", "eval_rate", "wall_time"];

pub fn outcome_label(o: &Outcome) -> &'static str {
    match o {
        Outcome::Solved(_) => "solved",
        Outcome::Exhausted => "exhausted",
        Outcome::ResourceLimit => "resource_limit",
    }
}

#[derive(Clone, Debug)]
pub struct MetricsRow {
    pub instance: String,
    pub algorithm: String,
    pub k: u32,
    pub seed: Option<u64>,
    pub outcome: String,
    pub expansions: u64,
    pub completely_expanded: u64,
    pub deferred_residual_size: u64,
    pub evaluated: u64,
    pub eval_rate: Option<f64>,
    pub wall_time: Option<f64>,
    pub solution_length: Option<u64>,
}

impl MetricsRow {
    /// `k` is the requested cell coordinate, not the engine's worker count
    /// (gbfs always runs one worker); `timed` marks native-backend rows, as
    /// virtual runs leave the wall-time and eval-rate cells empty so their
    /// CSV bytes stay reproducible.
    pub fn from_result(
        instance: &str,
        r: &SearchResult,
        k: u32,
        seed: Option<u64>,
        timed: bool,
    ) -> Self {
        MetricsRow {
            instance: instance.to_string(),
            algorithm: r.algo.name().to_string(),
            k,
            seed,
            outcome: outcome_label(&r.outcome).to_string(),
            expansions: r.expansions,
            completely_expanded: r.completely_expanded,
            deferred_residual_size: r.deferred_residual.len() as u64,
            evaluated: r.evaluated,
            eval_rate: if timed { r.eval_rate() } else { None },
            wall_time: timed.then_some(r.wall_time.as_secs_f64()),
            solution_length: r.solution().map(|p| p.states.len() as u64),
        }
    }

    fn line(&self) -> String {
        let opt_u = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.instance),
            self.algorithm,
            self.k,
            opt_u(self.seed),
            self.outcome,
            self.expansions,
            self.completely_expanded,
            self.deferred_residual_size,
            self.evaluated,
            self.eval_rate
                .map(|v| format!("{v:.3}"))
                .unwrap_or_default(),
            self.wall_time
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default(),
            opt_u(self.solution_length),
        )
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn metrics_block(rows: &[MetricsRow]) -> String {
    let mut out = format!("{METRICS_VERSION}\n{METRICS_HEADER}\n");
    for r in rows {
        out.push_str(&r.line());
        out.push('\n');
    }
    out
}

pub fn coverage_block(rows: &[MetricsRow]) -> String {
    let mut per: BTreeMap<(&str, u32), (u64, u64)> = BTreeMap::new();
    for r in rows {
        let e = per.entry((&r.algorithm, r.k)).or_insert((0, 0));
        e.1 += 1;
        if r.outcome == "solved" {
            e.0 += 1;
        }
    }
    let mut out = String::from("coverage v1\nalgorithm,k,solved,total\n");
    for ((algo, k), (solved, total)) in per {
        writeln!(out, "{algo},{k},{solved},{total}").unwrap();
    }
    out
}

/// Splits one CSV line, honoring double-quoted fields.
fn split_csv(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                chars.next();
                cur.push('"');
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(METRICS_VERSION) {
        return Err("expected `metrics v1` on line 1".into());
    }
    if lines.next() != Some(METRICS_HEADER) {
        return Err("line 2 is not the metrics v1 column header".into());
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            break; // coverage block follows
        }
        let f = split_csv(line);
        if f.len() != 12 {
            return Err(format!(
                "line {}: {} fields, expected 12",
                lineno + 3,
                f.len()
            ));
        }
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| format!("line {}: bad count `{s}`", lineno + 3))
        };
        let opt_num = |s: &str| -> Result<Option<u64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        let opt_f = |s: &str| -> Result<Option<f64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| format!("line {}: bad value `{s}`", lineno + 3))
            }
        };
        rows.push(MetricsRow {
            instance: f[0].clone(),
            algorithm: f[1].clone(),
            k: f[2]
                .parse()
                .map_err(|_| format!("line {}: bad k `{}`", lineno + 3, f[2]))?,
            seed: opt_num(&f[3])?,
            outcome: f[4].clone(),
            expansions: num(&f[5])?,
            completely_expanded: num(&f[6])?,
            deferred_residual_size: num(&f[7])?,
            evaluated: num(&f[8])?,
            eval_rate: opt_f(&f[9])?,
            wall_time: opt_f(&f[10])?,
            solution_length: opt_num(&f[11])?,
        });
    }
    Ok(rows)
}

fn metric_cell(row: &MetricsRow, metric: &str) -> String {
    if row.outcome != "solved" {
        return "fail".into();
    }
    match metric {
        "expansions" => row.expansions.to_string(),
        "eval_rate" => row.eval_rate.map(|v| format!("{v:.3}")).unwrap_or_default(),
        _ => row.wall_time.map(|v| format!("{v:.6}")).unwrap_or_default(),
    }
}

/// One scatter table: rows of `a` paired with rows of `b` on identical
/// (instance, k, seed) keys, unsolved sides shown as the `fail` sentinel.
/// The version line carries the log-log reference lines plots should draw.
pub fn pair_block(rows: &[MetricsRow], metric: &str, a: &str, b: &str) -> Result<String, String> {
    let side = |name: &str| -> BTreeMap<(String, u32, String), &MetricsRow> {
        let mut m = BTreeMap::new();
        for r in rows.iter().filter(|r| r.algorithm == name) {
            let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
            m.entry((r.instance.clone(), r.k, seed)).or_insert(r);
        }
        m
    };
    let (ma, mb) = (side(a), side(b));
    let shared: Vec<_> = ma.keys().filter(|k| mb.contains_key(*k)).cloned().collect();
    if shared.is_empty() {
        return Err(format!("no shared instances between `{a}` and `{b}`"));
    }
    let mut out = format!(
        "pairs v1,metric={metric},a={a},b={b},reflines=0.1;1;10\ninstance,k,seed,{a},{b}\n"
    );
    for key in &shared {
        let (inst, k, seed) = key;
        writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(inst),
            k,
            seed,
            metric_cell(ma[key], metric),
            metric_cell(mb[key], metric),
        )
        .unwrap();
    }
    Ok(out)
}
