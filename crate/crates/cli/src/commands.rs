use serde_json::{json, Map, Value};
use ssum_core::oracles::{
    brute_force_enumerate, brute_force_product, brute_force_simul, brute_force_ubssum, dp_enumerate,
    dp_product_decide, dp_simul_decide, dp_ubssum_decide, SolutionDag, DEFAULT_ORACLE_BUDGET,
};
use ssum_core::reductions::{
    isolate_to_unique, simul2_to_ssum, ssum_to_simul2, ssum_to_simul_log, ubssum_enumerate,
    ubssum_hamming_weights, ubssum_to_ssum,
};
use ssum_core::simulsum::{simul_decide_with, SimulDecision, DEFAULT_TABLE_LIMIT};
use ssum_core::solution_enum::{decide_lowspace, enumerate_solutions_with, EnumConfig};
use ssum_core::ssum_hamming::{count_solutions_mod, hamming_field, weight_multiplicities};
use ssum_core::subset_product::{
    product_decide_lowspace, reduce_to_simul, reduce_to_simul_prime, DEFAULT_LOWSPACE_BUDGET,
};
use ssum_core::{SimulInstance, SsumInstance, WeightProfile};

use crate::error::CliError;
use crate::instance::{Instance, InstanceFile};
use crate::{Algo, ReduceTarget};

/// Flags shared by every instance command.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub algo: Algo,
    pub seed: u64,
    pub trials: u32,
    pub budget: Option<u128>,
    pub strict_ks: bool,
}

/// Largest `n` the oracle command answers by subset scan.
const ORACLE_SCAN_LIMIT: usize = 20;

type Record = Map<String, Value>;

fn unsupported(command: &str, inst: &Instance, algo: Algo) -> CliError {
    CliError::Malformed(format!(
        "{command} does not support --algo {} on {} instances",
        algo.name(),
        inst.kind()
    ))
}

fn need_promise(k: Option<u64>) -> Result<u64, CliError> {
    k.ok_or_else(|| CliError::Malformed("this algorithm needs the promise k in the instance file".into()))
}

fn yes_no(b: bool) -> Value {
    Value::from(if b { "yes" } else { "no" })
}

fn weights_value(profile: &WeightProfile) -> Value {
    json!(profile.entries)
}

fn verify_all<T>(solutions: &[T], ok: impl Fn(&T) -> bool) -> Result<(), CliError> {
    if solutions.iter().all(ok) {
        Ok(())
    } else {
        Err(CliError::Verification("an emitted solution does not meet the target".into()))
    }
}

fn as_simul(inst: &SsumInstance) -> SimulInstance {
    SimulInstance {
        rows: inst.a.iter().map(|&a| vec![a]).collect(),
        targets: vec![inst.t],
    }
}

/// `trials` independent draws with seeds `seed, seed + 1, ...`; YES if any
/// draw says YES, since YES answers are never wrong.
fn repeated(opts: &Options, mut once: impl FnMut(u64) -> Result<SimulDecision, CliError>) -> Result<Record, CliError> {
    let mut yes = false;
    let mut primes = Vec::new();
    for trial in 0..opts.trials.max(1) {
        let d = once(opts.seed.wrapping_add(trial as u64))?;
        primes.extend(d.prime);
        yes |= d.yes;
    }
    let mut rec = Record::new();
    rec.insert("decision".into(), yes_no(yes));
    rec.insert("primes".into(), json!(primes));
    rec.insert("trials".into(), json!(opts.trials.max(1)));
    Ok(rec)
}

fn table_limit(opts: &Options) -> u128 {
    opts.budget.unwrap_or(DEFAULT_TABLE_LIMIT)
}

fn oracle_budget(opts: &Options) -> u128 {
    opts.budget.unwrap_or(DEFAULT_ORACLE_BUDGET)
}

fn decision(b: bool) -> Record {
    let mut rec = Record::new();
    rec.insert("decision".into(), yes_no(b));
    rec
}

pub fn decide(inst: &Instance, opts: &Options) -> Result<(Algo, Record), CliError> {
    let algo = match opts.algo {
        Algo::Auto => Algo::Series,
        a => a,
    };
    let limit = table_limit(opts);
    let rec = match (inst, algo) {
        (Instance::Ssum(i), Algo::Series) => {
            let s = as_simul(i);
            repeated(opts, |seed| Ok(simul_decide_with(&s, seed, limit)?))?
        }
        (Instance::Ssum(i), Algo::Dp) => {
            decision(SolutionDag::build(i, oracle_budget(opts))?.is_live(i.n(), i.t))
        }
        (Instance::Ssum(i), Algo::Lowspace) => {
            decision(decide_lowspace(i, opts.budget.unwrap_or(DEFAULT_LOWSPACE_BUDGET))?)
        }
        (Instance::Ssum(i), Algo::Bruteforce) => decision(!brute_force_enumerate(i)?.is_empty()),
        (Instance::Simul(i), Algo::Series) => repeated(opts, |seed| Ok(simul_decide_with(i, seed, limit)?))?,
        (Instance::Simul(i), Algo::Dp) => decision(dp_simul_decide(i, oracle_budget(opts))?),
        (Instance::Simul(i), Algo::Bruteforce) => decision(!brute_force_simul(i)?.is_empty()),
        (Instance::Product(i), Algo::Series) => {
            let red = reduce_to_simul_prime(i)?;
            repeated(opts, |seed| Ok(simul_decide_with(&red.simul, seed, limit)?))?
        }
        (Instance::Product(i), Algo::Dp) => decision(dp_product_decide(i, oracle_budget(opts))?),
        (Instance::Product(i), Algo::Lowspace) => {
            decision(product_decide_lowspace(i, opts.budget.unwrap_or(DEFAULT_LOWSPACE_BUDGET))?)
        }
        (Instance::Product(i), Algo::Bruteforce) => decision(!brute_force_product(i)?.is_empty()),
        (Instance::Ubssum(i), Algo::Series) => {
            let s = as_simul(&ubssum_to_ssum(i)?.ssum);
            repeated(opts, |seed| Ok(simul_decide_with(&s, seed, limit)?))?
        }
        (Instance::Ubssum(i), Algo::Dp) => decision(dp_ubssum_decide(i, oracle_budget(opts))?),
        (Instance::Ubssum(i), Algo::Lowspace) => decision(decide_lowspace(
            &ubssum_to_ssum(i)?.ssum,
            opts.budget.unwrap_or(DEFAULT_LOWSPACE_BUDGET),
        )?),
        (Instance::Ubssum(i), Algo::Bruteforce) => decision(!brute_force_ubssum(i)?.is_empty()),
        _ => return Err(unsupported("decide", inst, algo)),
    };
    Ok((algo, rec))
}

/// `series` when the file carries a promise, exact enumeration otherwise.
fn counting_algo(opts: &Options, k: Option<u64>, inst: &Instance) -> Algo {
    match opts.algo {
        Algo::Auto if k.is_some() && matches!(inst, Instance::Ssum(_) | Instance::Ubssum(_)) => Algo::Series,
        Algo::Auto if matches!(inst, Instance::Ssum(_)) => Algo::Dp,
        Algo::Auto => Algo::Bruteforce,
        a => a,
    }
}

fn exact_ssum(i: &SsumInstance, algo: Algo, opts: &Options) -> Result<Vec<Vec<usize>>, CliError> {
    Ok(match algo {
        Algo::Dp => dp_enumerate(i, oracle_budget(opts))?.sets,
        _ => brute_force_enumerate(i)?.sets,
    })
}

pub fn count(inst: &Instance, k: Option<u64>, opts: &Options) -> Result<(Algo, Record), CliError> {
    let algo = counting_algo(opts, k, inst);
    let mut rec = Record::new();
    let n = match (inst, algo) {
        (Instance::Ssum(i), Algo::Series) => {
            let cap = need_promise(k)?;
            rec.insert("primes".into(), json!([hamming_field(i.n(), cap, i.t)?.modulus()]));
            count_solutions_mod(i, cap)?
        }
        (Instance::Ssum(i), Algo::Dp | Algo::Bruteforce) => exact_ssum(i, algo, opts)?.len() as u64,
        (Instance::Ubssum(i), Algo::Series) => ubssum_hamming_weights(i, need_promise(k)?)?.total(),
        (Instance::Ubssum(i), Algo::Bruteforce) => brute_force_ubssum(i)?.len() as u64,
        (Instance::Simul(i), Algo::Bruteforce) => brute_force_simul(i)?.len() as u64,
        (Instance::Product(i), Algo::Bruteforce) => brute_force_product(i)?.len() as u64,
        _ => return Err(unsupported("count", inst, algo)),
    };
    rec.insert("count".into(), json!(n));
    Ok((algo, rec))
}

pub fn weights(inst: &Instance, k: Option<u64>, opts: &Options) -> Result<(Algo, Record), CliError> {
    let algo = counting_algo(opts, k, inst);
    let profile = match (inst, algo) {
        (Instance::Ssum(i), Algo::Series) => weight_multiplicities(i, need_promise(k)?)?,
        (Instance::Ssum(i), Algo::Dp | Algo::Bruteforce) => {
            WeightProfile::from_weights(exact_ssum(i, algo, opts)?.iter().map(Vec::len))
        }
        (Instance::Ubssum(i), Algo::Series) => ubssum_hamming_weights(i, need_promise(k)?)?,
        (Instance::Ubssum(i), Algo::Bruteforce) => WeightProfile::from_weights(
            brute_force_ubssum(i)?.iter().map(|b| b.iter().sum::<u64>() as usize),
        ),
        _ => return Err(unsupported("weights", inst, algo)),
    };
    let mut rec = Record::new();
    rec.insert("weights".into(), weights_value(&profile));
    Ok((algo, rec))
}

pub fn enumerate(inst: &Instance, k: Option<u64>, opts: &Options) -> Result<(Algo, Record), CliError> {
    let algo = counting_algo(opts, k, inst);
    let solutions = match (inst, algo) {
        (Instance::Ssum(i), Algo::Series) => {
            let config = EnumConfig {
                strict: opts.strict_ks,
                budget: opts.budget,
                seed: opts.seed,
            };
            let sets = enumerate_solutions_with(i, need_promise(k)?, &config)?.sets;
            verify_all(&sets, |s| i.is_solution(s))?;
            json!(sets)
        }
        (Instance::Ssum(i), Algo::Dp | Algo::Bruteforce) => {
            let sets = exact_ssum(i, algo, opts)?;
            verify_all(&sets, |s| i.is_solution(s))?;
            json!(sets)
        }
        (Instance::Ubssum(i), Algo::Series) => {
            let betas = ubssum_enumerate(i, need_promise(k)?)?;
            verify_all(&betas, |b| i.is_solution(b))?;
            json!(betas)
        }
        (Instance::Ubssum(i), Algo::Bruteforce) => {
            let betas = brute_force_ubssum(i)?;
            verify_all(&betas, |b| i.is_solution(b))?;
            json!(betas)
        }
        (Instance::Simul(i), Algo::Bruteforce) => {
            let sets = brute_force_simul(i)?;
            verify_all(&sets, |s| i.is_solution(s))?;
            json!(sets)
        }
        (Instance::Product(i), Algo::Bruteforce) => {
            let sets = brute_force_product(i)?;
            verify_all(&sets, |s| i.is_solution(s))?;
            json!(sets)
        }
        _ => return Err(unsupported("enumerate", inst, algo)),
    };
    let mut rec = Record::new();
    rec.insert("solutions".into(), solutions);
    Ok((algo, rec))
}

/// Ground truth: subset scan for small `n`, dynamic programming beyond.
pub fn oracle(inst: &Instance, opts: &Options) -> Result<(Algo, Record), CliError> {
    let algo = match opts.algo {
        Algo::Auto if inst.n() <= ORACLE_SCAN_LIMIT => Algo::Bruteforce,
        Algo::Auto => Algo::Dp,
        Algo::Dp => Algo::Dp,
        Algo::Bruteforce => Algo::Bruteforce,
        a => return Err(unsupported("oracle", inst, a)),
    };
    let mut rec = Record::new();
    let (yes, solutions): (bool, Option<Value>) = match (inst, algo) {
        (Instance::Ssum(i), _) => {
            let sets = exact_ssum(i, algo, opts)?;
            verify_all(&sets, |s| i.is_solution(s))?;
            (!sets.is_empty(), Some(json!(sets)))
        }
        (Instance::Simul(i), Algo::Bruteforce) => {
            let sets = brute_force_simul(i)?;
            verify_all(&sets, |s| i.is_solution(s))?;
            (!sets.is_empty(), Some(json!(sets)))
        }
        (Instance::Simul(i), _) => (dp_simul_decide(i, oracle_budget(opts))?, None),
        (Instance::Product(i), Algo::Bruteforce) => {
            let sets = brute_force_product(i)?;
            verify_all(&sets, |s| i.is_solution(s))?;
            (!sets.is_empty(), Some(json!(sets)))
        }
        (Instance::Product(i), _) => (dp_product_decide(i, oracle_budget(opts))?, None),
        (Instance::Ubssum(i), Algo::Bruteforce) => {
            let betas = brute_force_ubssum(i)?;
            verify_all(&betas, |b| i.is_solution(b))?;
            (!betas.is_empty(), Some(json!(betas)))
        }
        (Instance::Ubssum(i), _) => (dp_ubssum_decide(i, oracle_budget(opts))?, None),
    };
    rec.insert("decision".into(), yes_no(yes));
    if let Some(s) = solutions {
        rec.insert("count".into(), json!(s.as_array().map_or(0, Vec::len)));
        rec.insert("solutions".into(), s);
    }
    Ok((algo, rec))
}

fn instance_list(items: impl IntoIterator<Item = InstanceFile>) -> Value {
    Value::Array(items.into_iter().map(|f| serde_json::to_value(f).expect("serializable")).collect())
}

pub fn reduce(inst: &Instance, target: ReduceTarget, opts: &Options) -> Result<Record, CliError> {
    let mut rec = Record::new();
    match (inst, target) {
        (Instance::Ssum(i), ReduceTarget::Simul) => {
            let systems = ssum_to_simul2(i)?;
            rec.insert("instances".into(), instance_list(systems.iter().map(InstanceFile::from)));
        }
        (Instance::Ssum(i), ReduceTarget::SimulLog) => {
            let systems = ssum_to_simul_log(i)?;
            rec.insert("instances".into(), instance_list(systems.iter().map(InstanceFile::from)));
        }
        (Instance::Product(i), ReduceTarget::Simul) => {
            let red = reduce_to_simul(i)?;
            rec.insert("instances".into(), instance_list([InstanceFile::from(&red.simul)]));
            rec.insert("base".into(), json!(red.base));
            rec.insert("kept".into(), json!(red.kept));
            rec.insert("dropped".into(), json!(red.dropped));
        }
        (Instance::Simul(i), ReduceTarget::Ssum) => {
            let s = simul2_to_ssum(i)?;
            rec.insert("instances".into(), instance_list([InstanceFile::from(&s)]));
        }
        (Instance::Ubssum(i), ReduceTarget::Ssum) => {
            let red = ubssum_to_ssum(i)?;
            rec.insert("instances".into(), instance_list([InstanceFile::from(&red.ssum)]));
            rec.insert("gamma".into(), json!(red.gamma));
        }
        (Instance::Ssum(i), ReduceTarget::Ussum) => {
            let batch = isolate_to_unique(i, opts.seed)?;
            rec.insert("b".into(), json!(batch.b));
            rec.insert("targets".into(), json!(batch.targets));
            rec.insert("w".into(), json!(batch.w));
        }
        _ => {
            return Err(CliError::Malformed(format!(
                "no reduction from {} to {}",
                inst.kind(),
                target.name()
            )))
        }
    }
    Ok(rec)
}
