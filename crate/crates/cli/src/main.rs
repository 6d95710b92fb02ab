//! `ssum`: run the Subset Sum solvers on JSON instance files.

mod bench;
mod commands;
mod error;
mod instance;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::commands::Options;
use crate::error::CliError;
use crate::instance::InstanceFile;

/// Thread-count override for the internal worker pool.
const THREADS_ENV: &str = "SSUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ssum", version, about = "Solvers for Subset Sum variants")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Solver family; `auto` picks by instance kind and promise.
    #[arg(long, global = true, value_enum, default_value_t = Algo::Auto)]
    algo: Algo,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Independent randomized repetitions for `decide`.
    #[arg(long, global = true, default_value_t = 1)]
    trials: u32,

    /// Work or table-size limit in cells; exceeding it exits with status 3.
    #[arg(long, global = true)]
    budget: Option<u128>,

    /// Size the enumeration field for interpolation without verification.
    #[arg(long, global = true)]
    strict_ks: bool,

    /// Add elapsed wall time to each record (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Is there a solution?
    Decide { path: PathBuf },
    /// Number of solutions.
    Count { path: PathBuf },
    /// Hamming weights of the solutions with multiplicities.
    Weights { path: PathBuf },
    /// All solutions (0-based item indices, or multiplicities for ubssum).
    Enumerate { path: PathBuf },
    /// Transform the instance into another kind.
    Reduce {
        #[arg(value_enum)]
        target: ReduceTarget,
        path: PathBuf,
    },
    /// Ground truth by subset scan or dynamic programming.
    Oracle { path: PathBuf },
    /// Timing table in CSV.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Auto,
    Dp,
    #[value(alias = "simul")]
    Series,
    Lowspace,
    Bruteforce,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::Dp => "dp",
            Algo::Series => "series",
            Algo::Lowspace => "lowspace",
            Algo::Bruteforce => "bruteforce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceTarget {
    /// ssum -> two simul systems, product -> exponent system
    Simul,
    /// ssum -> simul systems pinning the first ceil(log2 n) items
    SimulLog,
    /// two-target simul -> ssum, ubssum -> ssum
    Ssum,
    /// ssum -> isolation batch
    Ussum,
}

impl ReduceTarget {
    pub fn name(self) -> &'static str {
        match self {
            ReduceTarget::Simul => "simul",
            ReduceTarget::SimulLog => "simul-log",
            ReduceTarget::Ssum => "ssum",
            ReduceTarget::Ussum => "ussum",
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Decide { .. } => "decide",
        Command::Count { .. } => "count",
        Command::Weights { .. } => "weights",
        Command::Enumerate { .. } => "enumerate",
        Command::Reduce { .. } => "reduce",
        Command::Oracle { .. } => "oracle",
        Command::Bench(_) => "bench",
    }
}

fn run_instance(cli: &Cli, path: &Path) -> Result<Map<String, Value>, CliError> {
    let start = Instant::now();
    let (inst, k) = InstanceFile::load(path)?.into_instance()?;
    let opts = Options {
        algo: cli.algo,
        seed: cli.seed,
        trials: cli.trials,
        budget: cli.budget,
        strict_ks: cli.strict_ks,
    };
    let (algo, payload) = match &cli.command {
        Command::Decide { .. } => commands::decide(&inst, &opts)?,
        Command::Count { .. } => commands::count(&inst, k, &opts)?,
        Command::Weights { .. } => commands::weights(&inst, k, &opts)?,
        Command::Enumerate { .. } => commands::enumerate(&inst, k, &opts)?,
        Command::Oracle { .. } => commands::oracle(&inst, &opts)?,
        Command::Reduce { target, .. } => {
            let mut rec = commands::reduce(&inst, *target, &opts)?;
            rec.insert("target".into(), json!(target.name()));
            (cli.algo, rec)
        }
        Command::Bench(_) => unreachable!("bench has no instance"),
    };
    let mut rec = Map::new();
    rec.insert("command".into(), json!(command_name(&cli.command)));
    rec.insert("kind".into(), json!(inst.kind()));
    rec.insert("algorithm".into(), json!(algo.name()));
    rec.insert("seed".into(), json!(cli.seed));
    rec.extend(payload);
    if cli.timing {
        rec.insert("elapsed_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
    }
    Ok(rec)
}

fn summary(rec: &Map<String, Value>) -> String {
    let field = |name: &str| rec.get(name).map(|v| format!(" {name}={v}"));
    let mut s = format!(
        "{} {} via {}:",
        rec["command"].as_str().unwrap_or("?"),
        rec["kind"].as_str().unwrap_or("?"),
        rec["algorithm"].as_str().unwrap_or("?")
    );
    for name in ["decision", "count", "weights"] {
        s.extend(field(name));
    }
    if let Some(Value::Array(sols)) = rec.get("solutions") {
        s.push_str(&format!(" {} solution(s)", sols.len()));
    }
    if let Some(Value::Array(insts)) = rec.get("instances") {
        s.push_str(&format!(" {} instance(s)", insts.len()));
    }
    s
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let stdout = std::io::stdout();
    let result = match &cli.command {
        Command::Bench(args) => bench::run(args, cli.seed, stdout.lock()),
        Command::Decide { path }
        | Command::Count { path }
        | Command::Weights { path }
        | Command::Enumerate { path }
        | Command::Reduce { path, .. }
        | Command::Oracle { path } => run_instance(&cli, path).map(|rec| {
            eprintln!("{}", summary(&rec));
            let mut out = stdout.lock();
            let _ = writeln!(out, "{}", Value::Object(rec));
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssum: {e}");
            let rec = json!({
                "command": command_name(&cli.command),
                "error": { "kind": e.label(), "message": e.message() },
            });
            let _ = writeln!(stdout.lock(), "{rec}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
