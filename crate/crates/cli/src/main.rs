//! Command-line front end: generate instances, analyze their bench
//! structure, run searches, check recorded runs, and batch experiments
//! into CSV.
//!
//! Exit codes: 0 ok, 1 usage, 2 check failure, 3 I/O.

mod inputs;
mod metrics;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metrics::MetricsRow;
use pargbfs::engine::{parse_trace, run, serialize_trace, Algo, Backend, Limits, Schedule};
use pargbfs::topology::{patho1_info, patho2_info, serialize_topology, StateSpace};
use pargbfs::{analyzer, verify};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check,
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Check => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Check => f.write_str("one or more checks failed"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "pargbfs",
    version,
    about = "Parallel greedy best-first search laboratory"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated state space as a topology v1 file
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
    /// Emit hwm table, bench transition system, and BTS membership
    Analyze {
        /// Topology file or generator spec
        #[arg(long)]
        space: String,
        #[arg(long, value_enum, default_value_t = Emit::All)]
        emit: Emit,
        /// Write to a file instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run one search and print its metrics row
    Search(SearchArgs),
    /// Check a recorded run against the search guarantees
    Verify {
        /// Topology file or generator spec
        #[arg(long)]
        space: String,
        /// Trace file from `search --trace`
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = Checks::All)]
        checks: Checks,
        /// Known worst-case expansion count, for instances too large to
        /// search exhaustively
        #[arg(long)]
        n_worst: Option<u64>,
    },
    /// Run an instance x algorithm x threads cross product, emitting
    /// metrics CSV plus a coverage summary
    Bench(BenchArgs),
    /// Pair two algorithms' metrics rows into scatter tables
    Plotdata {
        /// Metrics CSV produced by bench or search
        #[arg(long)]
        csv: PathBuf,
        /// First algorithm name
        #[arg(long)]
        a: String,
        /// Second algorithm name
        #[arg(long)]
        b: String,
        /// Output prefix; writes PREFIX.<metric>.csv per metric
        #[arg(short, long)]
        out: Option<String>,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Two-branch pathological family
    Patho1 {
        #[arg(long)]
        x: u32,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Stacked pathological family with t pair levels
    Patho2 {
        #[arg(long)]
        x: u32,
        #[arg(long)]
        t: u32,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Seeded random solvable digraph
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: u32,
        /// Maximum out-degree
        #[arg(long, default_value_t = 3)]
        b: u32,
        /// layered or noisy-distance
        #[arg(long, default_value = "layered")]
        mode: String,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    All,
    Hwm,
    Bts,
    Members,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Checks {
    All,
    Replay,
    Btc,
    Deferred,
    Bound,
}

#[derive(Args)]
struct RunKnobs {
    /// fifo, lifo, or rand:SEED
    #[arg(long, default_value = "fifo")]
    tie: String,
    /// native, virtual:SEED, or virtual-script:FILE
    #[arg(long, default_value = "native")]
    backend: String,
    /// Busy-spin cost per heuristic evaluation, native backend only
    #[arg(long, default_value_t = 0)]
    eval_delay_us: u64,
    #[arg(long)]
    max_expansions: Option<u64>,
    #[arg(long)]
    max_seconds: Option<f64>,
}

#[derive(Args)]
struct SearchArgs {
    /// Topology file or generator spec
    #[arg(long)]
    space: String,
    /// gbfs, kpgbfs, puhf-c, obat, or obat-s
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 1)]
    threads: u32,
    #[command(flatten)]
    knobs: RunKnobs,
    /// Write the run trace as JSONL
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Topology file, glob, or generator spec; repeatable
    #[arg(long = "instance", required = true)]
    instances: Vec<String>,
    /// Comma-separated algorithm names
    #[arg(long = "algo", value_delimiter = ',', required = true)]
    algos: Vec<String>,
    /// Comma-separated thread counts
    #[arg(long, value_delimiter = ',', default_value = "1")]
    threads: Vec<u32>,
    #[command(flatten)]
    knobs: RunKnobs,
    /// Repetitions per cell; seeded virtual backends advance the seed
    #[arg(long, default_value_t = 1)]
    reps: u32,
    /// Write the CSV to a file instead of stdout
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Gen { family } => cmd_gen(family),
        Cmd::Analyze { space, emit, out } => cmd_analyze(&space, emit, out.as_ref()),
        Cmd::Search(args) => cmd_search(args),
        Cmd::Verify {
            space,
            trace,
            checks,
            n_worst,
        } => cmd_verify(&space, &trace, checks, n_worst),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Plotdata { csv, a, b, out } => cmd_plotdata(&csv, &a, &b, out),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(family: GenCmd) -> Result<(), CliError> {
    let usage = |m: &str| CliError::Usage(m.into());
    let (spec, out) = match &family {
        GenCmd::Patho1 { x, out } => {
            if *x < 1 {
                return Err(usage("patho1 needs --x >= 1"));
            }
            (format!("patho1:x={x}"), out.clone())
        }
        GenCmd::Patho2 { x, t, out } => {
            if *x < 1 || *t < 1 {
                return Err(usage("patho2 needs --x >= 1 and --t >= 1"));
            }
            (format!("patho2:x={x}:t={t}"), out.clone())
        }
        GenCmd::Random {
            seed,
            n,
            b,
            mode,
            out,
        } => {
            if *n < 2 || *b < 1 {
                return Err(usage("random needs --n >= 2 and --b >= 1"));
            }
            (
                format!("random:seed={seed}:n={n}:b={b}:mode={mode}"),
                out.clone(),
            )
        }
    };
    let space = inputs::parse_genspec(&spec).map_err(CliError::Usage)?;
    write_file(&out, &serialize_topology(&space))?;

    let mut constants: Vec<(&str, String)> = vec![("states", space.n().to_string())];
    match &family {
        GenCmd::Patho1 { x, .. } => {
            let info = patho1_info(*x);
            constants.push(("family", "patho1".into()));
            constants.push(("x", x.to_string()));
            constants.push(("line_states", info.line_states.len().to_string()));
            constants.push((
                "best_case_expansions",
                info.best_case_expansions.to_string(),
            ));
            constants.push((
                "worst_case_expansions",
                info.worst_case_expansions.to_string(),
            ));
            constants.push((
                "pathological_expansions",
                info.pathological_expansions.to_string(),
            ));
        }
        GenCmd::Patho2 { x, t, .. } => {
            let info = patho2_info(*x, *t);
            constants.push(("family", "patho2".into()));
            constants.push(("x", x.to_string()));
            constants.push(("t", t.to_string()));
            constants.push(("line_states", info.line_states.len().to_string()));
            constants.push((
                "best_case_expansions",
                info.best_case_expansions.to_string(),
            ));
            constants.push((
                "worst_case_expansions",
                info.worst_case_expansions.to_string(),
            ));
            constants.push((
                "pathological_expansions",
                info.pathological_expansions.to_string(),
            ));
        }
        GenCmd::Random {
            seed, n, b, mode, ..
        } => {
            constants.push(("family", "random".into()));
            constants.push(("seed", seed.to_string()));
            constants.push(("n", n.to_string()));
            constants.push(("b", b.to_string()));
            constants.push(("mode", mode.clone()));
        }
    }
    let mut text = String::from("constants v1\nname,value\n");
    for (name, value) in constants {
        writeln!(text, "{name},{value}").unwrap();
    }
    print!("{text}");
    Ok(())
}

fn bts_dot(space: &StateSpace) -> String {
    let g = analyzer::bts(space);
    let name = |root: pargbfs::StateId| match g.vertices.get(&root) {
        Some(b) => format!("\"{}:{}\"", b.root, b.level),
        None => format!("\"{root}:?\""),
    };
    let mut s = String::from("digraph bts {\n");
    for root in g.vertices.keys() {
        writeln!(s, "  {};", name(*root)).unwrap();
    }
    for (a, b) in &g.edges {
        writeln!(s, "  {} -> {};", name(*a), name(*b)).unwrap();
    }
    s.push_str("}\n");
    s
}

fn cmd_analyze(space: &str, emit_kind: Emit, out: Option<&PathBuf>) -> Result<(), CliError> {
    let (_, sp) = inputs::load_instance(space)?;
    let want = |k: Emit| emit_kind == Emit::All || emit_kind == k;
    let mut sections = Vec::new();
    if want(Emit::Hwm) {
        let hwm = analyzer::hwm_all(&sp);
        let mut s = String::from("state,h,hwm\n");
        for st in sp.states() {
            writeln!(s, "{st},{},{}", sp.h(st), hwm.get(st)).unwrap();
        }
        sections.push(s);
    }
    if want(Emit::Bts) {
        sections.push(bts_dot(&sp));
    }
    if want(Emit::Members) {
        let members = analyzer::bts_states(&sp);
        let mut s = String::from("state,member\n");
        for st in sp.states() {
            writeln!(s, "{st},{}", u8::from(members.contains(&st))).unwrap();
        }
        sections.push(s);
    }
    emit(out, &sections.join("\n"))
}

struct PlannedRun {
    seed: Option<u64>,
    timed: bool,
    sched: Schedule,
}

fn plan_run(base: &Backend, rep: u32, knobs: &RunKnobs) -> PlannedRun {
    let backend = match base {
        Backend::VirtualSeeded(s) => Backend::VirtualSeeded(s + rep as u64),
        other => other.clone(),
    };
    let seed = match backend {
        Backend::VirtualSeeded(s) => Some(s),
        _ => None,
    };
    let timed = matches!(backend, Backend::Native);
    let sched = Schedule {
        backend,
        eval_delay: Duration::from_micros(knobs.eval_delay_us),
        limits: Limits {
            max_expansions: knobs.max_expansions,
            max_seconds: knobs.max_seconds,
        },
    };
    PlannedRun { seed, timed, sched }
}

fn cmd_search(args: SearchArgs) -> Result<(), CliError> {
    let (label, space) = inputs::load_instance(&args.space)?;
    let algo: Algo = args.algo.parse().map_err(CliError::Usage)?;
    if args.threads < 1 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let tie = inputs::parse_tie(&args.knobs.tie).map_err(CliError::Usage)?;
    let base = inputs::parse_backend(&args.knobs.backend)?;
    let plan = plan_run(&base, 0, &args.knobs);
    let result = run(algo, &space, args.threads, tie, &plan.sched)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(path) = &args.trace {
        write_file(path, &serialize_trace(&result.trace))?;
    }
    let row = MetricsRow::from_result(&label, &result, args.threads, plan.seed, plan.timed);
    print!("{}", metrics::metrics_block(&[row]));
    Ok(())
}

fn cmd_verify(
    space: &str,
    trace: &PathBuf,
    checks: Checks,
    n_worst: Option<u64>,
) -> Result<(), CliError> {
    let (_, sp) = inputs::load_instance(space)?;
    let io = |e: String| CliError::Io(format!("{}: {e}", trace.display()));
    let text = fs::read_to_string(trace).map_err(|e| io(e.to_string()))?;
    let events = parse_trace(&text).map_err(|e| io(e.to_string()))?;
    let result = verify::result_from_trace(&sp, events).map_err(|e| io(e.to_string()))?;

    let want = |c: Checks| checks == Checks::All || checks == c;
    let mut reports = Vec::new();
    if want(Checks::Replay) {
        reports.push(verify::replay_gbfs_validity(&sp, &result.committed_order));
    }
    if want(Checks::Btc) {
        reports.push(verify::check_bts_constrained(&sp, &result));
    }
    if want(Checks::Deferred) {
        reports.push(verify::check_deferred_bounds(&result));
    }
    if want(Checks::Bound) {
        let report = verify::check_expansion_bound(&sp, &result, n_worst)
            .map_err(|e| CliError::Usage(format!("{e}; pass --n-worst")))?;
        reports.push(report);
    }

    let mut out = String::from("checks v1\ncheck,verdict,witness,measured\n");
    for r in &reports {
        let measured: Vec<String> = r.measured.iter().map(|(n, v)| format!("{n}={v}")).collect();
        writeln!(
            out,
            "{},{},{},{}",
            r.check,
            r.verdict,
            metrics::csv_field(r.witness.as_deref().unwrap_or("")),
            measured.join(";"),
        )
        .unwrap();
    }
    print!("{out}");
    if reports.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(CliError::Check)
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let instances = inputs::expand_instances(&args.instances)?;
    let algos: Vec<Algo> = args
        .algos
        .iter()
        .map(|s| s.parse().map_err(CliError::Usage))
        .collect::<Result<_, _>>()?;
    if args.threads.iter().any(|&k| k < 1) {
        return Err(CliError::Usage(
            "--threads entries must be at least 1".into(),
        ));
    }
    if args.reps < 1 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let tie = inputs::parse_tie(&args.knobs.tie).map_err(CliError::Usage)?;
    let base = inputs::parse_backend(&args.knobs.backend)?;

    let mut rows = Vec::new();
    for (label, space) in &instances {
        for &algo in &algos {
            for &k in &args.threads {
                for rep in 0..args.reps {
                    let plan = plan_run(&base, rep, &args.knobs);
                    let result = run(algo, space, k, tie.clone(), &plan.sched)
                        .map_err(|e| CliError::Usage(format!("{label} {algo} k={k}: {e}")))?;
                    rows.push(MetricsRow::from_result(
                        label, &result, k, plan.seed, plan.timed,
                    ));
                }
            }
        }
    }
    let text = format!(
        "{}\n{}",
        metrics::metrics_block(&rows),
        metrics::coverage_block(&rows)
    );
    emit(args.out.as_ref(), &text)
}

fn cmd_plotdata(csv: &PathBuf, a: &str, b: &str, out: Option<String>) -> Result<(), CliError> {
    let text =
        fs::read_to_string(csv).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
    let rows = metrics::parse_metrics_csv(&text)
        .map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
    let mut blocks = Vec::new();
    for metric in metrics::PAIR_METRICS {
        blocks.push((
            metric,
            metrics::pair_block(&rows, metric, a, b).map_err(CliError::Usage)?,
        ));
    }
    match out {
        Some(prefix) => {
            for (metric, block) in &blocks {
                let path = PathBuf::from(format!("{prefix}.{metric}.csv"));
                write_file(&path, block)?;
            }
            Ok(())
        }
        None => {
            let joined: Vec<&str> = blocks.iter().map(|(_, b)| b.as_str()).collect();
            print!("{}", joined.join("\n"));
            Ok(())
        }
    }
}
