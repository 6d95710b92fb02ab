use std::io::Write;
use std::time::Instant;

use clap::{Args, ValueEnum};
use ssum_core::generators::{planted_four, rng};
use ssum_core::oracles::{dp_product_decide, dp_simul_decide, DEFAULT_ORACLE_BUDGET};
use ssum_core::simulsum::simul_decide;
use ssum_core::solution_enum::enumerate_solutions;
use ssum_core::ssum_hamming::hamming_weights;
use ssum_core::subset_product::product_decide;
use ssum_core::{ProductInstance, SimulInstance};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// hamming_weights on planted four-solution instances, one row per t
    Hamming,
    /// enumerate_solutions on the same planted instances
    Enumerate,
    /// simul_decide against the table oracle on random systems
    DpVsSimul,
    /// product_decide against the table oracle on random instances
    Product,
    /// header only
    Empty,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Items per instance.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Targets (comma separated). The random suites read the first entry as
    /// the largest target.
    #[arg(long, value_delimiter = ',', default_values_t = [1024u64, 2048, 4096, 8192, 16384])]
    pub t: Vec<u64>,
    /// Promise for the planted suites, number of constraints for dp-vs-simul.
    #[arg(long, default_value_t = 4)]
    pub k: u64,
    /// Timed repetitions per row; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    /// Instances for the random suites.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
}

struct Row {
    algorithm: &'static str,
    n: usize,
    t: u64,
    k: u64,
    time: f64,
    check: &'static str,
}

fn median_secs<T>(runs: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut times = Vec::with_capacity(runs.max(1));
    let mut last = None;
    for _ in 0..runs.max(1) {
        let start = Instant::now();
        last = Some(f());
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    (times[times.len() / 2], last.expect("at least one run"))
}

fn bad_params(msg: &str) -> CliError {
    CliError::Malformed(format!("bench: {msg}"))
}

fn planted_rows(args: &BenchArgs, seed: u64, enumerate: bool) -> Result<Vec<Row>, CliError> {
    if args.n < 6 || args.t.iter().any(|&t| t < 64) || args.k < 4 {
        return Err(bad_params("planted suites need n >= 6, every t >= 64 and k >= 4"));
    }
    args.t
        .iter()
        .map(|&t| {
            let inst = planted_four(args.n, t, seed);
            let (time, ok) = if enumerate {
                let (time, sols) = median_secs(args.runs, || enumerate_solutions(&inst, args.k));
                (time, sols?.len() == 4)
            } else {
                let (time, w) = median_secs(args.runs, || hamming_weights(&inst, args.k));
                (time, w? == [1, 2, 3])
            };
            Ok(Row {
                algorithm: if enumerate { "enumerate" } else { "hamming" },
                n: args.n,
                t,
                k: args.k,
                time,
                check: if ok { "ok" } else { "mismatch" },
            })
        })
        .collect()
}

fn simul_rows(args: &BenchArgs, seed: u64) -> Result<Vec<Row>, CliError> {
    use rand::Rng;
    let max_t = *args.t.first().ok_or_else(|| bad_params("dp-vs-simul needs a target bound"))?;
    if args.k == 0 || max_t > 64 {
        return Err(bad_params("dp-vs-simul needs k >= 1 and a target bound of at most 64"));
    }
    let mut r = rng(seed);
    (0..args.instances)
        .map(|i| {
            let targets: Vec<u64> = (0..args.k).map(|_| r.gen_range(0..=max_t)).collect();
            let rows = (0..args.n)
                .map(|_| targets.iter().map(|&t| r.gen_range(0..=t)).collect())
                .collect();
            let inst = SimulInstance::new(rows, targets)?;
            let (time, d) = median_secs(args.runs, || simul_decide(&inst, seed.wrapping_add(i as u64)));
            let truth = dp_simul_decide(&inst, DEFAULT_ORACLE_BUDGET)?;
            Ok(Row {
                algorithm: "simul",
                n: args.n,
                t: inst.targets.iter().copied().max().unwrap_or(0),
                k: args.k,
                time,
                check: if d?.yes == truth { "agree" } else { "disagree" },
            })
        })
        .collect()
}

fn product_rows(args: &BenchArgs, seed: u64) -> Result<Vec<Row>, CliError> {
    use rand::Rng;
    let max_t = *args.t.first().ok_or_else(|| bad_params("product needs a target bound"))?;
    if max_t == 0 || max_t > 1 << 20 {
        return Err(bad_params("product needs a target bound in [1, 2^20]"));
    }
    let mut r = rng(seed);
    (0..args.instances)
        .map(|i| {
            let t = r.gen_range(1..=max_t);
            let a = (0..args.n).map(|_| r.gen_range(1..=max_t)).collect();
            let inst = ProductInstance::new(a, t)?;
            let (time, d) = median_secs(args.runs, || product_decide(&inst, seed.wrapping_add(i as u64)));
            let truth = dp_product_decide(&inst, DEFAULT_ORACLE_BUDGET)?;
            Ok(Row {
                algorithm: "product",
                n: args.n,
                t,
                k: 1,
                time,
                check: if d?.yes == truth { "agree" } else { "disagree" },
            })
        })
        .collect()
}

pub fn run(args: &BenchArgs, seed: u64, out: impl Write) -> Result<(), CliError> {
    let rows = match args.suite {
        Suite::Hamming => planted_rows(args, seed, false)?,
        Suite::Enumerate => planted_rows(args, seed, true)?,
        Suite::DpVsSimul => simul_rows(args, seed)?,
        Suite::Product => product_rows(args, seed)?,
        Suite::Empty => Vec::new(),
    };
    let io = |e: csv::Error| CliError::Malformed(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "n", "t", "k", "time", "check"]).map_err(io)?;
    for row in rows {
        w.write_record([
            row.algorithm.to_string(),
            row.n.to_string(),
            row.t.to_string(),
            row.k.to_string(),
            format!("{:.6}", row.time),
            row.check.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Malformed(format!("writing CSV: {e}")))
}
