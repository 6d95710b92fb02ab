//! Instance transformers between Subset Sum variants, plus the unbounded
//! hamming-weight and enumeration routines built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modmath::find_primitive_root;
use crate::series::{log_product_coeffs, series_exp, series_inverse, FactorSign, ProductSpec};
use crate::simulsum::SimulInstance;
use crate::solution_enum::enumerate_solutions;
use crate::ssum_hamming::{check_series_target, hamming_field, profile_from_power_sums, SsumInstance, WeightProfile};

/// Unbounded Subset Sum: find `beta >= 0` with `sum_i beta_i a_i = t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UbssumInstance {
    pub a: Vec<u64>,
    pub t: u64,
}

impl UbssumInstance {
    pub fn new(a: Vec<u64>, t: u64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("instance needs at least one item"));
        }
        if a.contains(&0) {
            return Err(Error::invalid("zero item gives infinitely many solutions"));
        }
        Ok(UbssumInstance { a, t })
    }

    pub fn is_solution(&self, beta: &[u64]) -> bool {
        beta.len() == self.a.len()
            && beta.iter().zip(&self.a).map(|(&b, &a)| b as u128 * a as u128).sum::<u128>() == self.t as u128
    }
}

/// The instances `(b, 4n^2 t + l)` for `l` in `0..=2n^2`, with
/// `b_i = 4n^2 a_i + w_i`. Member `0` is only ever YES through the empty set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsolationBatch {
    pub b: Vec<u64>,
    pub targets: Vec<u64>,
    pub w: Vec<u64>,
    pub seed: u64,
}

impl IsolationBatch {
    pub fn member(&self, l: usize) -> SsumInstance {
        SsumInstance {
            a: self.b.clone(),
            t: self.targets[l],
        }
    }

    pub fn members(&self) -> impl Iterator<Item = SsumInstance> + '_ {
        (0..self.targets.len()).map(|l| self.member(l))
    }
}

fn overflow() -> Error {
    Error::invalid("transformed instance overflows 64 bits")
}

pub fn isolate_to_unique(inst: &SsumInstance, seed: u64) -> Result<IsolationBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = inst.n() as u64;
    let w: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=2 * n)).collect();
    isolate_with_weights(inst, w, seed)
}

/// Same transformation with caller-chosen weights `w_i` in `[1, 2n]`.
pub fn isolate_with_weights(inst: &SsumInstance, w: Vec<u64>, seed: u64) -> Result<IsolationBatch> {
    let n = inst.n() as u64;
    if w.len() != inst.n() || w.iter().any(|&x| x == 0 || x > 2 * n) {
        return Err(Error::invalid("isolation weights must lie in [1, 2n]"));
    }
    let scale = 4 * n * n;
    let b = inst
        .a
        .iter()
        .zip(&w)
        .map(|(&a, &wi)| a.checked_mul(scale).and_then(|v| v.checked_add(wi)).ok_or_else(overflow))
        .collect::<Result<_>>()?;
    let base = inst.t.checked_mul(scale).ok_or_else(overflow)?;
    let targets = (0..=2 * n * n)
        .map(|l| base.checked_add(l).ok_or_else(overflow))
        .collect::<Result<_>>()?;
    Ok(IsolationBatch { b, targets, w, seed })
}

/// Systems pinning membership of the first `pins` items: one per bit pattern,
/// each adding a unit constraint per pinned item. `pins = 1` is the two-system
/// reduction; the instance is YES iff some system is.
pub fn ssum_to_simul_pinned(inst: &SsumInstance, pins: usize) -> Result<Vec<SimulInstance>> {
    if pins > inst.n() {
        return Err(Error::invalid(format!("cannot pin {pins} of {} items", inst.n())));
    }
    (0u64..1 << pins)
        .map(|pattern| {
            let rows = inst
                .a
                .iter()
                .enumerate()
                .map(|(i, &a)| {
                    let mut row = vec![a];
                    row.extend((0..pins).map(|j| (i == j) as u64));
                    row
                })
                .collect();
            let mut targets = vec![inst.t];
            targets.extend((0..pins).map(|j| pattern >> j & 1));
            SimulInstance::new(rows, targets)
        })
        .collect()
}

pub fn ssum_to_simul2(inst: &SsumInstance) -> Result<[SimulInstance; 2]> {
    let [s0, s1]: [SimulInstance; 2] = ssum_to_simul_pinned(inst, 1)?.try_into().expect("two systems");
    Ok([s0, s1])
}

/// Most systems the logarithmic extension will produce.
pub const MAX_PINNED_SYSTEMS: usize = 1 << 12;

/// Pins the first `ceil(log2 n)` items, giving at most `2n` systems.
pub fn ssum_to_simul_log(inst: &SsumInstance) -> Result<Vec<SimulInstance>> {
    let pins = (inst.n().max(1) as u64).next_power_of_two().trailing_zeros() as usize;
    if 1usize << pins > MAX_PINNED_SYSTEMS {
        return Err(Error::BudgetExceeded {
            needed: 1 << pins,
            budget: MAX_PINNED_SYSTEMS as u128,
        });
    }
    ssum_to_simul_pinned(inst, pins)
}

/// Folds a two-target system into one Subset Sum instance with items
/// `gamma b_i + a_i` and target `gamma t_2 + t_1`, where column `a` carries
/// the smaller target and `gamma = 1 + sum a_i`.
pub fn simul2_to_ssum(sys: &SimulInstance) -> Result<SsumInstance> {
    if sys.k() != 2 {
        return Err(Error::invalid(format!("expected two targets, got {}", sys.k())));
    }
    let (lo, hi) = if sys.targets[0] <= sys.targets[1] { (0, 1) } else { (1, 0) };
    let sum_lo: u128 = sys.rows.iter().map(|r| r[lo] as u128).sum();
    if sys.targets[lo] as u128 > sum_lo {
        return Ok(SsumInstance { a: vec![2], t: 1 });
    }
    let gamma = sum_lo + 1;
    let fold = |small: u64, big: u64| -> Result<u64> {
        u64::try_from(gamma * big as u128 + small as u128).map_err(|_| overflow())
    };
    let a = sys.rows.iter().map(|r| fold(r[lo], r[hi])).collect::<Result<_>>()?;
    Ok(SsumInstance {
        a,
        t: fold(sys.targets[lo], sys.targets[hi])?,
    })
}

/// Binary expansion: item `i (gamma + 1) + j` of the result is `2^j a_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UbssumReduction {
    pub ssum: SsumInstance,
    pub gamma: u32,
    pub n: usize,
}

impl UbssumReduction {
    pub fn multiplicities(&self, set: &[usize]) -> Vec<u64> {
        let width = self.gamma as usize + 1;
        let mut beta = vec![0u64; self.n];
        for &idx in set {
            beta[idx / width] += 1 << (idx % width);
        }
        beta
    }
}

pub fn ubssum_to_ssum(inst: &UbssumInstance) -> Result<UbssumReduction> {
    let gamma = if inst.t == 0 { 0 } else { inst.t.ilog2() };
    let mut a = Vec::with_capacity(inst.a.len() * (gamma as usize + 1));
    for &ai in &inst.a {
        for j in 0..=gamma {
            a.push(ai.checked_shl(j).filter(|v| v >> j == ai).ok_or_else(overflow)?);
        }
    }
    Ok(UbssumReduction {
        ssum: SsumInstance { a, t: inst.t },
        gamma,
        n: inst.a.len(),
    })
}

/// `coef_{x^t} prod_i (1 - c x^{a_i})^{-1}` with `c = scale^exp`.
fn inverse_coefficient(items: &[u64], t: usize, scale: u64, exp: u64, field: crate::PrimeField) -> Result<u64> {
    let spec = ProductSpec {
        exponents: items.to_vec(),
        scale_base: scale as i64,
        scale_exp: exp,
        sign: FactorSign::Minus,
    };
    let h = series_exp(&log_product_coeffs(&spec, t, field)?, t)?;
    Ok(series_inverse(&h, t)?.coeff(t))
}

/// Distinct values of `sum_i beta_i` over all solutions, with multiplicities.
pub fn ubssum_hamming_weights(inst: &UbssumInstance, cap: u64) -> Result<WeightProfile> {
    let field = hamming_field(inst.a.len(), cap, inst.t)?;
    let t = check_series_target(inst.t)?;
    if t == 0 {
        return Ok(WeightProfile { entries: vec![(0, 1)] });
    }
    let items: Vec<u64> = inst.a.iter().copied().filter(|&a| a <= inst.t).collect();
    let m = inverse_coefficient(&items, t, 1, 0, field)?;
    if m == 0 {
        return Ok(WeightProfile::default());
    }
    if m > cap {
        return Err(Error::inconsistent(format!("count {m} mod p exceeds the bound {cap}")));
    }
    let mu = find_primitive_root(field.modulus());
    let power_sums: Vec<u64> = (1..=m)
        .into_par_iter()
        .map(|j| inverse_coefficient(&items, t, mu, j, field))
        .collect::<Result<_>>()?;
    profile_from_power_sums(&power_sums, field, mu, t)
}

/// All multiplicity vectors, through the binary expansion and the sparse
/// interpolation enumerator. Each is checked against the instance.
pub fn ubssum_enumerate(inst: &UbssumInstance, cap: u64) -> Result<Vec<Vec<u64>>> {
    let red = ubssum_to_ssum(inst)?;
    let sets = enumerate_solutions(&red.ssum, cap)?;
    let mut out: Vec<Vec<u64>> = sets.sets.iter().map(|s| red.multiplicities(s)).collect();
    if let Some(bad) = out.iter().find(|b| !inst.is_solution(b)) {
        return Err(Error::inconsistent(format!("recovered {bad:?} is not a solution")));
    }
    out.sort();
    Ok(out)
}
