//! Simultaneous subset sum through the coefficient of `x_1^{t_1} ... x_k^{t_k}`
//! in `prod_i (1 + prod_j x_j^{a_ij})`, computed as a multivariate exp of a
//! multivariate log.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modmath::{is_prime, mul_slices, PrimeField};
use crate::series::{solve_relaxed, BlockConvolution};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulInstance {
    pub rows: Vec<Vec<u64>>,
    pub targets: Vec<u64>,
}

impl SimulInstance {
    /// Every row must have one entry per target.
    pub fn new(rows: Vec<Vec<u64>>, targets: Vec<u64>) -> Result<Self> {
        if let Some(row) = rows.iter().find(|r| r.len() != targets.len()) {
            return Err(Error::invalid(format!(
                "row of length {} for {} targets",
                row.len(),
                targets.len()
            )));
        }
        Ok(SimulInstance { rows, targets })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.targets.len()
    }

    pub fn is_solution(&self, set: &[usize]) -> bool {
        let mut sums = vec![0u128; self.k()];
        for &i in set {
            let Some(row) = self.rows.get(i) else { return false };
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v as u128;
            }
        }
        sums.iter().zip(&self.targets).all(|(&s, &t)| s == t as u128)
    }
}

/// Dense truncated polynomial in `k` variables. Entry `(e_1, ..., e_k)` lives
/// at `sum_j e_j stride_j` with the first axis outermost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    pub field: PrimeField,
    pub dims: Vec<usize>,
    pub coeffs: Vec<u64>,
}

impl MultiPoly {
    pub fn zero(field: PrimeField, dims: Vec<usize>) -> Self {
        let size = dims.iter().map(|&d| d + 1).product();
        MultiPoly {
            field,
            dims,
            coeffs: vec![0; size],
        }
    }

    pub fn index(&self, exps: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for (&e, &d) in exps.iter().zip(&self.dims) {
            if e > d {
                return None;
            }
            idx = idx * (d + 1) + e;
        }
        Some(idx)
    }

    pub fn get(&self, exps: &[usize]) -> u64 {
        self.index(exps).map_or(0, |i| self.coeffs[i])
    }

    /// Naive truncated expansion of `prod_rows (1 + x^row)`; reference for tests.
    pub fn expand_naive(rows: &[Vec<u64>], dims: &[usize], field: PrimeField) -> MultiPoly {
        let mut acc = MultiPoly::zero(field, dims.to_vec());
        acc.coeffs[0] = 1;
        for row in rows {
            if row.iter().zip(dims).any(|(&a, &d)| a as usize > d) {
                continue;
            }
            let prev = acc.coeffs.clone();
            for (idx, &v) in prev.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let exps = unflatten(idx, dims);
                let shifted: Vec<usize> = exps.iter().zip(row).map(|(&e, &a)| e + a as usize).collect();
                if let Some(j) = acc.index(&shifted) {
                    acc.coeffs[j] = field.add(acc.coeffs[j], v);
                }
            }
        }
        acc
    }
}

fn unflatten(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut exps = vec![0; dims.len()];
    for (e, &d) in exps.iter_mut().zip(dims).rev() {
        *e = idx % (d + 1);
        idx /= d + 1;
    }
    exps
}

/// Largest `l` with `l * e <= dims` componentwise, for a nonzero `e`.
fn max_multiple(e: &[u64], dims: &[usize]) -> u64 {
    e.iter()
        .zip(dims)
        .filter(|(&v, _)| v > 0)
        .map(|(&v, &d)| d as u64 / v)
        .min()
        .expect("nonzero exponent vector")
}

/// `ln prod_i (1 + prod_j x_j^{a_ij})` truncated to `x_j^{t_j}`.
///
/// Rows are grouped by exponent vector; a vector `e` occurring `s_e` times
/// contributes `s_e sum_l (-1)^{l-1}/l x^{l e}`.
pub fn multivar_log_product(inst: &SimulInstance, field: PrimeField) -> Result<MultiPoly> {
    let dims: Vec<usize> = inst.targets.iter().map(|&t| t as usize).collect();
    let mut counts: BTreeMap<&[u64], u64> = BTreeMap::new();
    for row in &inst.rows {
        if row.iter().zip(&inst.targets).any(|(&a, &t)| a > t) {
            continue;
        }
        if row.iter().all(|&a| a == 0) {
            return Err(Error::precondition(
                "all-zero row is a constant factor with no logarithm",
            ));
        }
        *counts.entry(row.as_slice()).or_insert(0) += 1;
    }
    let max_l = counts.keys().map(|e| max_multiple(e, &dims)).max().unwrap_or(0);
    if max_l >= field.modulus() {
        return Err(Error::precondition(format!(
            "log needs inverses up to {max_l} but p = {}",
            field.modulus()
        )));
    }
    let inv = field.inverses_up_to(max_l as usize);
    let mut out = MultiPoly::zero(field, dims.clone());
    for (e, &count) in &counts {
        let count = field.reduce(count);
        for l in 1..=max_multiple(e, &dims) {
            let exps: Vec<usize> = e.iter().map(|&v| (v * l) as usize).collect();
            let idx = out.index(&exps).expect("within bounds");
            let term = field.mul(count, inv[l as usize]);
            out.coeffs[idx] = if l % 2 == 1 {
                field.add(out.coeffs[idx], term)
            } else {
                field.sub(out.coeffs[idx], term)
            };
        }
    }
    Ok(out)
}

/// Truncated multiplication of block sequences: blocks are polynomials in the
/// trailing variables, multiplied by Kronecker substitution with radix
/// `2 d_j + 1` per axis so no carries occur.
struct KroneckerRing {
    field: PrimeField,
    block: usize,
    embed_block: usize,
    /// embedding offset of every block entry
    offsets: Vec<usize>,
}

impl KroneckerRing {
    fn new(field: PrimeField, rest: &[usize]) -> Self {
        let mut embed_strides = vec![0; rest.len()];
        let mut stride = 1;
        for j in (0..rest.len()).rev() {
            embed_strides[j] = stride;
            stride *= 2 * rest[j] + 1;
        }
        let block: usize = rest.iter().map(|&d| d + 1).product();
        let offsets = (0..block)
            .map(|idx| {
                unflatten(idx, rest)
                    .iter()
                    .zip(&embed_strides)
                    .map(|(&e, &s)| e * s)
                    .sum()
            })
            .collect();
        KroneckerRing {
            field,
            block,
            embed_block: stride,
            offsets,
        }
    }

    fn embed(&self, blocks: &[u64]) -> Vec<u64> {
        let count = blocks.len() / self.block;
        let mut out = vec![0u64; count * self.embed_block];
        for (b, chunk) in blocks.chunks_exact(self.block).enumerate() {
            let base = b * self.embed_block;
            for (&v, &off) in chunk.iter().zip(&self.offsets) {
                out[base + off] = v;
            }
        }
        out
    }
}

impl BlockConvolution for KroneckerRing {
    fn field(&self) -> PrimeField {
        self.field
    }

    fn block(&self) -> usize {
        self.block
    }

    fn leaf(&self) -> usize {
        1
    }

    fn convolve(&self, a: &[u64], b: &[u64], keep: usize) -> Vec<u64> {
        let b = &b[..b.len().min(keep * self.block)];
        let prod = mul_slices(self.field, &self.embed(a), &self.embed(b));
        let mut out = vec![0u64; keep * self.block];
        for blk in 0..keep {
            let base = blk * self.embed_block;
            if base >= prod.len() {
                break;
            }
            for (slot, &off) in out[blk * self.block..(blk + 1) * self.block]
                .iter_mut()
                .zip(&self.offsets)
            {
                *slot = prod.get(base + off).copied().unwrap_or(0);
            }
        }
        out
    }

    fn mul_add(&self, acc: &mut [u64], x: &[u64], y: &[u64]) {
        let prod = self.convolve(x, y, 1);
        for (a, p) in acc.iter_mut().zip(prod) {
            *a = self.field.add(*a, p);
        }
    }
}

/// `exp(f)` truncated to `f.dims`, for `f` with zero constant term.
///
/// Splits `f = sum_i f_i(x_2..x_k) x_1^i`; the block `g_0 = exp(f_0)` is a
/// `(k-1)`-variate exponential and the remaining blocks follow the relaxed
/// recurrence `i g_i = sum_{j<i} (i-j) f_{i-j} g_j` from `d/dx_1`.
pub fn multivar_exp(f: &MultiPoly) -> Result<MultiPoly> {
    let field = f.field;
    if f.coeffs.first().copied().unwrap_or(0) != 0 {
        return Err(Error::precondition("multivar_exp needs a zero constant term"));
    }
    let Some((&d0, rest)) = f.dims.split_first() else {
        return Ok(MultiPoly {
            field,
            dims: Vec::new(),
            coeffs: vec![1],
        });
    };
    if d0 as u64 >= field.modulus() {
        return Err(Error::precondition(format!(
            "multivar_exp needs p > d_1 (p = {}, d_1 = {d0})",
            field.modulus()
        )));
    }
    let ring = KroneckerRing::new(field, rest);
    let r = ring.block;
    let head = MultiPoly {
        field,
        dims: rest.to_vec(),
        coeffs: f.coeffs[..r].to_vec(),
    };
    let g0 = multivar_exp(&head)?;
    let mut kernel = vec![0u64; (d0 + 1) * r];
    for i in 1..=d0 {
        let s = field.reduce(i as u64);
        for (dst, &v) in kernel[i * r..(i + 1) * r].iter_mut().zip(&f.coeffs[i * r..(i + 1) * r]) {
            *dst = field.mul(s, v);
        }
    }
    let coeffs = solve_relaxed(&ring, &kernel, &g0.coeffs, d0 + 1);
    Ok(MultiPoly {
        field,
        dims: f.dims.clone(),
        coeffs,
    })
}

/// Instance after dropping rows that exceed a target and columns with a zero
/// target; `zero_rows` counts all-zero rows, which only double the count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSimul {
    pub inst: SimulInstance,
    pub zero_rows: usize,
}

pub fn reduce_instance(inst: &SimulInstance) -> ReducedSimul {
    let keep: Vec<usize> = (0..inst.k()).filter(|&j| inst.targets[j] > 0).collect();
    let mut rows = Vec::new();
    let mut zero_rows = 0;
    for row in &inst.rows {
        if row.iter().zip(&inst.targets).any(|(&a, &t)| a > t) {
            continue;
        }
        let r: Vec<u64> = keep.iter().map(|&j| row[j]).collect();
        if r.iter().all(|&v| v == 0) {
            zero_rows += 1;
        } else {
            rows.push(r);
        }
    }
    let targets = keep.iter().map(|&j| inst.targets[j]).collect();
    ReducedSimul {
        inst: SimulInstance { rows, targets },
        zero_rows,
    }
}

/// `coef_{x^t} prod_i (1 + x^{a_i})` modulo `field.p`, for any instance.
pub fn simul_coefficient(inst: &SimulInstance, field: PrimeField) -> Result<u64> {
    let reduced = reduce_instance(inst);
    let doubling = field.pow(2, reduced.zero_rows as u64);
    let mut core = reduced.inst;
    if core.k() == 0 {
        return Ok(doubling);
    }
    // the smallest target becomes the recursion axis
    let min_axis = (0..core.k()).min_by_key(|&j| core.targets[j]).unwrap();
    core.targets.swap(0, min_axis);
    for row in &mut core.rows {
        row.swap(0, min_axis);
    }
    let log = multivar_log_product(&core, field)?;
    let g = multivar_exp(&log)?;
    let target: Vec<usize> = core.targets.iter().map(|&t| t as usize).collect();
    Ok(field.mul(doubling, g.get(&target)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulDecision {
    pub yes: bool,
    /// Prime used, `None` when the instance was decided by preprocessing.
    pub prime: Option<u64>,
    /// Number of solutions modulo `prime`.
    pub count_mod_p: Option<u64>,
}

/// Cells allowed for the dense multivariate table unless the caller says otherwise.
pub const DEFAULT_TABLE_LIMIT: u128 = 1 << 26;

/// A prime drawn uniformly from `[lo, hi]` by rejection sampling.
pub fn sample_prime(lo: u64, hi: u64, rng: &mut ChaCha8Rng) -> u64 {
    assert!(lo <= hi);
    if hi == 2 {
        return 2;
    }
    let lo_odd = lo.max(3) | 1;
    assert!(lo_odd <= hi, "no odd candidates in [{lo}, {hi}]");
    let count = (hi - lo_odd) / 2 + 1;
    loop {
        let cand = lo_odd + 2 * rng.gen_range(0..count);
        if is_prime(cand) {
            return cand;
        }
    }
}

/// Decides the instance with one-sided error: YES answers are always right,
/// NO answers are wrong only when the sampled prime divides the true count.
pub fn simul_decide(inst: &SimulInstance, seed: u64) -> Result<SimulDecision> {
    simul_decide_with(inst, seed, DEFAULT_TABLE_LIMIT)
}

pub fn simul_decide_with(inst: &SimulInstance, seed: u64, table_limit: u128) -> Result<SimulDecision> {
    let reduced = reduce_instance(inst);
    if reduced.inst.k() == 0 {
        return Ok(SimulDecision {
            yes: true,
            prime: None,
            count_mod_p: None,
        });
    }
    let cells: u128 = reduced.inst.targets.iter().map(|&t| t as u128 + 1).product();
    crate::error::check_budget(cells, table_limit)?;
    let big_n: u128 = reduced.inst.targets.iter().map(|&t| 2 * t as u128 + 1).product();
    let hi = (inst.n() as u128 + big_n).pow(3).min((1 << 62) - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = sample_prime(big_n as u64 + 1, hi as u64, &mut rng);
    let field = PrimeField::new(p)?;
    let count = simul_coefficient(inst, field)?;
    Ok(SimulDecision {
        yes: count != 0,
        prime: Some(p),
        count_mod_p: Some(count),
    })
}
