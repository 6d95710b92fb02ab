//! End-to-end acceptance suite. Runs every criterion in order, prints one
//! PASS/FAIL line each, and exits nonzero if any failed.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use ssum_core::generators::{planted_four, random_product, random_simul, random_ssum, rng};
use ssum_core::modmath::{factorize, find_prime_in_interval, is_prime};
use ssum_core::oracles::{
    brute_force_enumerate, brute_force_product, brute_force_ubssum, brute_force_weights, dp_product_decide,
    dp_simul_decide, dp_ubssum_decide, SolutionDag, DEFAULT_ORACLE_BUDGET,
};
use ssum_core::reductions::{isolate_to_unique, simul2_to_ssum, ssum_to_simul2, ssum_to_simul_log, ubssum_to_ssum};
use ssum_core::series::{log_product_coeffs, series_exp, FactorSign, ProductSpec};
use ssum_core::simulsum::{simul_decide, SimulDecision};
use ssum_core::solution_enum::{enumerate_solutions, kane_univariate_sum};
use ssum_core::ssum_hamming::{hamming_weights, weight_multiplicities};
use ssum_core::subset_product::{
    kane_multivariate_sum, product_decide, product_decide_lowspace, pseudo_prime_factor_set, reduce_to_simul,
    reduce_to_simul_prime, DEFAULT_LOWSPACE_BUDGET,
};
use ssum_core::{
    ModPoly, PrimeField, ProductInstance, SimulInstance, SsumInstance, UbssumInstance,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e:?}"))
}

fn is_live(inst: &SsumInstance) -> Result<bool, String> {
    Ok(ok(SolutionDag::build(inst, DEFAULT_ORACLE_BUDGET), "dag")?.is_live(inst.n(), inst.t))
}

// ---------------------------------------------------------------------------

fn hamming_oracle() -> Outcome {
    let mut r = rng(0xA11CE);
    for i in 0..500 {
        let inst = random_ssum(&mut r, 16, 200);
        let truth = ok(brute_force_weights(&inst), "brute force")?;
        let cap = truth.total().max(1) + r.gen_range(0..=3);
        let got = ok(weight_multiplicities(&inst, cap), "weight_multiplicities")?;
        ensure!(got == truth, "instance {i} {inst:?}: got {got:?}, expected {truth:?}");
    }
    Ok("500/500 histograms equal".into())
}

fn enumeration_oracle() -> Outcome {
    let mut r = rng(0xB0B);
    let mut largest = 0;
    for i in 0..300 {
        let inst = random_ssum(&mut r, 12, 80);
        let truth = ok(brute_force_enumerate(&inst), "brute force")?;
        largest = largest.max(truth.len());
        let cap = truth.len() as u64 + r.gen_range(0..=3);
        let got = ok(enumerate_solutions(&inst, cap.max(1)), "enumerate_solutions")?;
        ensure!(got == truth, "instance {i} {inst:?}: got {:?}, expected {:?}", got.sets, truth.sets);
    }
    Ok(format!("300/300 sets equal (up to {largest} solutions)"))
}

#[derive(Default)]
struct Protocol {
    agree: usize,
    transient: usize,
}

impl Protocol {
    /// First draw with `seed`; a NO against an oracle YES is retried with five
    /// fresh seeds and must be corrected by at least one of them.
    fn check(
        &mut self,
        truth: bool,
        seed: u64,
        decide: impl Fn(u64) -> Result<SimulDecision, String>,
    ) -> Result<(), String> {
        let first = decide(seed)?;
        if first.yes == truth {
            self.agree += 1;
            return Ok(());
        }
        ensure!(!first.yes, "YES from the randomized solver on a NO instance (seed {seed})");
        for retry in 1..=5u64 {
            if decide(seed.wrapping_add(retry * 0x9E37_79B9))?.yes {
                self.transient += 1;
                return Ok(());
            }
        }
        Err(format!("NO persisted across 5 further seeds on a YES instance (seed {seed})"))
    }

    fn summary(&self, total: usize) -> String {
        format!("{}/{total} agree on the first seed, {} transient NO-side misses", self.agree, self.transient)
    }
}

fn simul_correctness() -> Outcome {
    let mut r = rng(0xC0FFEE);
    let mut p = Protocol::default();
    for i in 0..500u64 {
        let inst = random_simul(&mut r, 12, 3, 8);
        let truth = ok(dp_simul_decide(&inst, DEFAULT_ORACLE_BUDGET), "dp")?;
        p.check(truth, 1000 + i, |s| ok(simul_decide(&inst, s), "simul_decide"))
            .map_err(|e| format!("instance {i} {inst:?}: {e}"))?;
    }
    Ok(p.summary(500))
}

/// Whether `t` has at most two prime factors counted with multiplicity.
fn at_most_two_factors(t: u64) -> bool {
    factorize(t).values().sum::<u32>() <= 2
}

fn multisets(pool: &[u64], max_len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(Vec::new(), 0usize)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (m, from) in frontier {
            for (j, &x) in pool.iter().enumerate().skip(from) {
                let mut m2: Vec<u64> = m.clone();
                m2.push(x);
                out.push(m2.clone());
                next.push((m2, j));
            }
        }
        frontier = next;
    }
    out
}

fn product_correctness() -> Outcome {
    let mut r = rng(0xD1CE);
    let mut p = Protocol::default();
    for i in 0..500u64 {
        let inst = random_product(&mut r, 12, 10_000, 10_000);
        let truth = ok(dp_product_decide(&inst, DEFAULT_ORACLE_BUDGET), "dp")?;
        p.check(truth, 2000 + i, |s| ok(product_decide(&inst, s), "product_decide"))
            .map_err(|e| format!("instance {i} {inst:?}: {e}"))?;
    }
    // low-space: every multiset of at most 6 items drawn from the divisors of
    // t plus one non-divisor, for every t <= 50 with at most two prime factors
    let mut exhaustive = 0;
    for t in (1..=50u64).filter(|&t| at_most_two_factors(t)) {
        let mut pool: Vec<u64> = (1..=t).filter(|d| t % d == 0).collect();
        pool.push(t + 1);
        for a in multisets(&pool, 6).into_iter().filter(|a| !a.is_empty()) {
            let inst = ok(ProductInstance::new(a, t), "instance")?;
            let truth = !ok(brute_force_product(&inst), "brute force")?.is_empty();
            let got = ok(product_decide_lowspace(&inst, DEFAULT_LOWSPACE_BUDGET), "lowspace")?;
            ensure!(got == truth, "low-space {inst:?}: got {got}, expected {truth}");
            exhaustive += 1;
        }
    }
    Ok(format!("{}; low-space exact on {exhaustive} exhaustive instances", p.summary(500)))
}

fn random_prime_above(r: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    find_prime_in_interval(r.gen_range(lo..=hi))
}

fn coefficient_extraction() -> Outcome {
    let mut r = rng(0xE5);
    for i in 0..200 {
        let t = r.gen_range(1..=300usize);
        let n = r.gen_range(1..=30);
        let spec = ProductSpec {
            exponents: (0..n).map(|_| r.gen_range(1..=t as u64 + 20)).collect(),
            scale_base: r.gen_range(-10..=10),
            scale_exp: r.gen_range(0..=5),
            sign: if r.gen_bool(0.5) { FactorSign::Plus } else { FactorSign::Minus },
        };
        let p = if r.gen_bool(0.5) {
            random_prime_above(&mut r, t as u64 + 1, 1 << 20)
        } else {
            random_prime_above(&mut r, 1 << 40, 1 << 62)
        };
        let field = ok(PrimeField::new(p), "field")?;
        let log = ok(log_product_coeffs(&spec, t, field), "log_product_coeffs")?;
        let got = ok(series_exp(&log, t), "series_exp")?;
        ensure!(got.same_as(&spec.expand_naive(t, field)), "spec {i} {spec:?}, t = {t}, p = {p}");
    }
    Ok("200/200 truncated products equal".into())
}

fn small_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&q| is_prime(q)).collect()
}

fn kane_identities() -> Outcome {
    let mut r = rng(0xF00D);
    for i in 0..100 {
        let deg = r.gen_range(0..=20usize);
        let q = *small_primes(deg as u64 + 3, 257).choose(&mut r).unwrap();
        let field = ok(PrimeField::new(q), "field")?;
        let f = ModPoly::new(field, (0..=deg).map(|_| r.gen_range(0..q)).collect());
        let t = r.gen_range(0..=deg as u64 + 2);
        let got = kane_univariate_sum(&f, t);
        ensure!(got == field.neg(f.coeff(t as usize)), "univariate {i}: q = {q}, t = {t}");
    }
    for i in 0..100 {
        let k = r.gen_range(1..=3usize);
        // keep q^k small enough for a full walk over (F_q^*)^k
        let q_max = [257u64, 257, 43][k - 1];
        let deg = r.gen_range(0..=20usize.min(q_max as usize - 3));
        let q = *small_primes(deg as u64 + 3, q_max).choose(&mut r).unwrap();
        let field = ok(PrimeField::new(q), "field")?;
        let side = deg + 1;
        let dense: Vec<u64> = (0..side.pow(k as u32))
            .map(|_| if r.gen_bool(0.3) { r.gen_range(0..q) } else { 0 })
            .collect();
        let terms: Vec<(Vec<u64>, u64)> = dense
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(idx, &c)| ((0..k).map(|j| (idx / side.pow(j as u32) % side) as u64).collect(), c))
            .collect();
        let targets: Vec<u64> = (0..k).map(|_| r.gen_range(0..=deg as u64)).collect();
        let flat: usize = targets.iter().enumerate().map(|(j, &e)| e as usize * side.pow(j as u32)).sum();
        let eval = |x: &[u64]| {
            terms.iter().fold(0, |acc, (e, c)| {
                let mono = x.iter().zip(e).fold(*c, |m, (&xi, &ei)| field.mul(m, field.pow(xi, ei)));
                field.add(acc, mono)
            })
        };
        let got = kane_multivariate_sum(eval, &targets, field);
        ensure!(got == dense[flat], "{k}-variate {i}: q = {q}, targets {targets:?}");
    }
    Ok("100/100 univariate, 100/100 multivariate".into())
}

fn pseudo_prime_factors() -> Outcome {
    let mut r = rng(0x5EED);
    let mut max_depth_ratio: f64 = 0.0;
    for i in 0..500 {
        let len = r.gen_range(1..=8);
        let inputs: Vec<u64> = if i % 2 == 0 {
            (0..len).map(|_| r.gen_range(1..=1_000_000_000)).collect()
        } else {
            // products over a shared pool so the gcd splitting has work to do
            let pool: Vec<u64> = (0..4).map(|_| r.gen_range(2..=5000)).collect();
            (0..len)
                .map(|_| {
                    let mut x = 1u64;
                    for _ in 0..r.gen_range(1..=4) {
                        let y = *pool.choose(&mut r).unwrap();
                        if x * y <= 1_000_000_000 {
                            x *= y;
                        }
                    }
                    x
                })
                .collect()
        };
        let f = ok(pseudo_prime_factor_set(&inputs), "pseudo_prime_factor_set")?;
        for (x, &a) in f.base.iter().enumerate() {
            ensure!(a > 1, "tuple {i}: base element {a}");
            for &b in &f.base[x + 1..] {
                ensure!(num_gcd(a, b) == 1, "tuple {i}: {a} and {b} share a factor");
            }
        }
        for (x, row) in inputs.iter().zip(&f.exponents) {
            let back = f.base.iter().zip(row).fold(1u64, |acc, (&b, &e)| acc * b.pow(e));
            ensure!(back == *x, "tuple {i}: {x} reconstructs to {back}");
        }
        let primes: BTreeSet<u64> = inputs.iter().flat_map(|&x| factorize(x).into_keys()).collect();
        ensure!(f.base.len() <= primes.len(), "tuple {i}: base larger than prime count");
        let bits: u32 = inputs.iter().map(|&x| 64 - x.leading_zeros()).sum();
        ensure!(f.depth <= bits as usize, "tuple {i}: depth {} exceeds {bits} input bits", f.depth);
        max_depth_ratio = max_depth_ratio.max(f.depth as f64 / bits as f64);
    }
    Ok(format!("500/500 tuples; depth at most {max_depth_ratio:.2} of the input bit length"))
}

fn num_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn random_ubssum(r: &mut ChaCha8Rng, max_n: usize, max_t: u64) -> UbssumInstance {
    let t = r.gen_range(1..=max_t);
    let n = r.gen_range(1..=max_n);
    UbssumInstance::new((0..n).map(|_| r.gen_range(1..=t)).collect(), t).unwrap()
}

fn reduction_web() -> Outcome {
    let mut r = rng(0x7E8);
    let any_yes = |systems: &[SimulInstance]| -> Result<bool, String> {
        for s in systems {
            if ok(dp_simul_decide(s, DEFAULT_ORACLE_BUDGET), "dp")? {
                return Ok(true);
            }
        }
        Ok(false)
    };
    for i in 0..300 {
        let inst = random_ssum(&mut r, 10, 40);
        let truth = is_live(&inst)?;
        ensure!(any_yes(&ok(ssum_to_simul2(&inst), "simul2")?)? == truth, "ssum_to_simul2 {i} {inst:?}");
        ensure!(any_yes(&ok(ssum_to_simul_log(&inst), "simul_log")?)? == truth, "ssum_to_simul_log {i} {inst:?}");
        let batch = ok(isolate_to_unique(&inst, i), "isolate")?;
        let mut member_yes = false;
        for m in batch.members() {
            member_yes |= !ok(brute_force_enumerate(&m), "brute force")?.is_empty();
        }
        ensure!(member_yes == truth, "isolate_to_unique {i} {inst:?}");
    }
    let mut done = 0;
    while done < 300 {
        let sys = random_simul(&mut r, 10, 2, 8);
        if sys.k() != 2 {
            continue;
        }
        let truth = ok(dp_simul_decide(&sys, DEFAULT_ORACLE_BUDGET), "dp")?;
        ensure!(is_live(&ok(simul2_to_ssum(&sys), "simul2_to_ssum")?)? == truth, "simul2_to_ssum {sys:?}");
        done += 1;
    }
    for i in 0..300 {
        let inst = random_product(&mut r, 10, 1000, 1000);
        let truth = ok(dp_product_decide(&inst, DEFAULT_ORACLE_BUDGET), "dp")?;
        for red in [ok(reduce_to_simul(&inst), "pseudo")?, ok(reduce_to_simul_prime(&inst), "prime")?] {
            let got = ok(dp_simul_decide(&red.simul, DEFAULT_ORACLE_BUDGET), "dp")?;
            ensure!(got == truth, "product reduction {i} {inst:?} over {:?}", red.base);
        }
    }
    for i in 0..300 {
        let inst = random_ubssum(&mut r, 6, 60);
        let truth = ok(dp_ubssum_decide(&inst, DEFAULT_ORACLE_BUDGET), "dp")?;
        let red = ok(ubssum_to_ssum(&inst), "ubssum_to_ssum")?;
        ensure!(is_live(&red.ssum)? == truth, "ubssum_to_ssum {i} {inst:?}");
    }
    for i in 0..300 {
        let inst = random_ubssum(&mut r, 4, 30);
        let red = ok(ubssum_to_ssum(&inst), "ubssum_to_ssum")?;
        let want = ok(brute_force_ubssum(&inst), "brute force")?.len();
        let got = ok(brute_force_enumerate(&red.ssum), "brute force")?.len();
        ensure!(got == want, "ubssum count {i} {inst:?}: {got} vs {want}");
    }
    // isolation on instances with at least two solutions
    let (mut trials, mut isolated) = (0u64, 0);
    while trials < 200 {
        let inst = random_ssum(&mut r, 10, 40);
        if ok(brute_force_enumerate(&inst), "brute force")?.len() < 2 {
            continue;
        }
        let batch = ok(isolate_to_unique(&inst, 10_000 + trials), "isolate")?;
        let mut unique = false;
        for m in batch.members() {
            if ok(brute_force_enumerate(&m), "brute force")?.len() == 1 {
                unique = true;
                break;
            }
        }
        isolated += unique as usize;
        trials += 1;
    }
    ensure!(isolated >= 80, "isolation succeeded in {isolated}/200 trials");
    Ok(format!("all transformers agree on 300 instances each; isolation {isolated}/200"))
}

fn scaling_trend() -> Outcome {
    let start = Instant::now();
    let (small, large) = (planted_four(64, 1 << 12, 1), planted_four(64, 1 << 16, 1));
    let time = |inst: &SsumInstance| -> Result<Duration, String> {
        let s = Instant::now();
        let w = ok(hamming_weights(inst, 4), "hamming_weights")?;
        let d = s.elapsed();
        ensure!(w == [1, 2, 3], "planted weights came out as {w:?}");
        Ok(d)
    };
    time(&small)?;
    time(&large)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..9 {
        a.push(time(&small)?);
        b.push(time(&large)?);
    }
    a.sort();
    b.sort();
    let ratio = b[4].as_secs_f64() / a[4].as_secs_f64();
    let total = start.elapsed();
    ensure!(total < Duration::from_secs(180), "check took {total:?}");
    ensure!(ratio <= 24.0, "median ratio {ratio:.1} ({:?} -> {:?})", a[4], b[4]);
    Ok(format!("median {:?} -> {:?}, ratio {ratio:.1} (limit 24), {total:.1?} total", a[4], b[4]))
}

fn run_case(golden: &Path, args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ssum"))
        .args(args)
        .current_dir(golden)
        .output()
        .map_err(|e| format!("spawning ssum: {e}"))?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn cli_determinism() -> Outcome {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases = std::fs::read_to_string(golden.join("cases.txt")).map_err(|e| e.to_string())?;
    let mut inputs = BTreeSet::new();
    let mut n = 0;
    for line in cases.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
        let mut words = line.split_whitespace();
        let (name, code) = (words.next().unwrap(), words.next().unwrap());
        let args: Vec<&str> = words.collect();
        inputs.insert(*args.last().unwrap());
        let want = std::fs::read(golden.join(format!("{name}.out"))).map_err(|e| format!("{name}: {e}"))?;
        let (status, first) = run_case(&golden, &args)?;
        let (_, second) = run_case(&golden, &args)?;
        ensure!(status.to_string() == code, "{name}: exit status {status}, expected {code}");
        ensure!(first == want, "{name}: stdout differs from {name}.out");
        ensure!(first == second, "{name}: two runs differ");
        n += 1;
    }
    ensure!(inputs.len() == 12, "corpus has {} instance files, expected 12", inputs.len());
    Ok(format!("{n} cases over {} instance files byte-identical", inputs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("hamming-weight oracle equivalence", hamming_oracle),
        ("enumeration oracle equivalence", enumeration_oracle),
        ("simultaneous subset sum correctness", simul_correctness),
        ("subset product correctness", product_correctness),
        ("coefficient extraction fidelity", coefficient_extraction),
        ("Kane identities", kane_identities),
        ("pseudo-prime-factor set", pseudo_prime_factors),
        ("reduction web", reduction_web),
        ("scaling trend", scaling_trend),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}: {name}: {detail} [{:.1?}]", i + 1, start.elapsed());
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
