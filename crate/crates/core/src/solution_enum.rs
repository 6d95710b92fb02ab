//! Enumeration of all solutions of an instance with few solutions.
//!
//! The coefficient of `x^t` in `f(x, y) = prod_i (1 + y_i x^{a_i})` is the
//! multilinear polynomial `p_t(y) = sum_S y_S` over the solutions `S`. Values
//! of `p_t` come from Kane's identity (a sum over `F_q^*` that never
//! materializes the degree-`t` polynomial), and its monomials are recovered by
//! sparse interpolation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::modmath::{find_prime_in_interval, find_primitive_root, ModPoly, PrimeField};
use crate::ssum_hamming::SsumInstance;

/// Multilinear polynomial stored as index set -> nonzero coefficient.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseMultilinear {
    pub terms: BTreeMap<Vec<usize>, u64>,
}

impl SparseMultilinear {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, point: &[u64], field: PrimeField) -> u64 {
        self.terms.iter().fold(0, |acc, (set, &c)| {
            let term = set.iter().fold(c, |m, &i| field.mul(m, point[i]));
            field.add(acc, term)
        })
    }
}

/// Realisable sets as sorted index lists (0-based), in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub sets: Vec<Vec<usize>>,
}

impl SolutionSet {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
        }
        sets.sort();
        sets.dedup();
        SolutionSet { sets }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// `p_t(c)` through `-sum_{alpha in F_q^*} alpha^{q-1-t} prod_i (1 + c_i alpha^{a_i})`.
///
/// Uses a constant number of field elements: every power is recomputed.
pub fn kane_coeff_eval(inst: &SsumInstance, assignment: &[u64], field: PrimeField) -> Result<u64> {
    if assignment.len() != inst.n() {
        return Err(Error::invalid(format!(
            "assignment has {} values for {} items",
            assignment.len(),
            inst.n()
        )));
    }
    let q = field.modulus();
    let degree: u128 = inst.a.iter().map(|&v| v as u128).sum();
    if q as u128 <= degree + 2 {
        return Err(Error::precondition(format!(
            "Kane's identity needs q > deg + 2 (q = {q}, deg = {degree})"
        )));
    }
    if inst.t as u128 > degree {
        return Ok(0);
    }
    let shift = q - 1 - inst.t;
    let mut sum = 0u64;
    for alpha in 1..q {
        let mut f = 1u64;
        for (&a, &c) in inst.a.iter().zip(assignment) {
            let term = field.mul(field.reduce(c), field.pow(alpha, a));
            f = field.mul(f, field.add(1, term));
            if f == 0 {
                break;
            }
        }
        sum = field.add(sum, field.mul(f, field.pow(alpha, shift)));
    }
    Ok(field.neg(sum))
}

/// `sum_{x in F_q^*} x^{q-1-t} f(x)`, which equals `-coef_{x^t} f` whenever
/// `q > deg f + 2`.
pub fn kane_univariate_sum(f: &ModPoly, t: u64) -> u64 {
    let field = f.field();
    let q = field.modulus();
    let shift = (q - 1) - (t % (q - 1));
    let mut sum = 0u64;
    for x in 1..q {
        sum = field.add(sum, field.mul(f.eval(x), field.pow(x, shift)));
    }
    sum
}

/// Evaluates `p_t` at many points, sharing the walk over `F_q^*`.
///
/// `alpha` runs through `g^e` for a generator `g`, so every `alpha^{a_i}` is
/// advanced by one multiplication per step.
struct KaneOracle<'a> {
    items: &'a [u64],
    t: u64,
    field: PrimeField,
    generator: u64,
}

impl KaneOracle<'_> {
    fn eval_batch(&self, points: &[Vec<u64>]) -> Vec<u64> {
        if points.is_empty() {
            return Vec::new();
        }
        let field = self.field;
        let q = field.modulus();
        let order = q - 1;
        let g = self.generator;
        let steps: Vec<u64> = self.items.iter().map(|&a| field.pow(g, a)).collect();
        let shift = order - self.t % order;
        let shift_step = field.pow(g, shift);
        const CHUNK: u64 = 4096;
        let chunks = order.div_ceil(CHUNK);
        let partial: Vec<Vec<u64>> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * CHUNK;
                let end = (start + CHUNK).min(order);
                let alpha0 = field.pow(g, start);
                let mut pw: Vec<u64> = self.items.iter().map(|&a| field.pow(alpha0, a)).collect();
                let mut weight = field.pow(alpha0, shift);
                let mut acc = vec![0u64; points.len()];
                let mut f = vec![0u64; points.len()];
                for _ in start..end {
                    f.iter_mut().for_each(|v| *v = weight);
                    for (i, &p) in pw.iter().enumerate() {
                        for (fv, point) in f.iter_mut().zip(points) {
                            *fv = field.mul(*fv, field.add(1, field.mul(point[i], p)));
                        }
                    }
                    for (a, &v) in acc.iter_mut().zip(&f) {
                        *a = field.add(*a, v);
                    }
                    for (p, &s) in pw.iter_mut().zip(&steps) {
                        *p = field.mul(*p, s);
                    }
                    weight = field.mul(weight, shift_step);
                }
                acc
            })
            .collect();
        let mut total = vec![0u64; points.len()];
        for part in partial {
            for (t, v) in total.iter_mut().zip(part) {
                *t = field.add(*t, v);
            }
        }
        total.into_iter().map(|v| field.neg(v)).collect()
    }
}

/// Source of values of a multilinear polynomial.
pub trait BlackBox: Sync {
    fn eval_batch(&self, points: &[Vec<u64>]) -> Vec<u64>;
}

impl<F: Fn(&[u64]) -> u64 + Sync> BlackBox for F {
    fn eval_batch(&self, points: &[Vec<u64>]) -> Vec<u64> {
        points.par_iter().map(|p| self(p)).collect()
    }
}

impl BlackBox for KaneOracle<'_> {
    fn eval_batch(&self, points: &[Vec<u64>]) -> Vec<u64> {
        KaneOracle::eval_batch(self, points)
    }
}

/// Parameters of the exponent substitution `x_i <- y^{e_i}`, `e_i = k^{i-1} mod p0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substitution {
    pub p0: u64,
    /// Largest exponent a monomial can map to: `min(n, d) * (p0 - 1)`.
    pub max_exponent: u64,
}

impl Substitution {
    /// `p0` is the smallest prime above `2 s^2 n`, which guarantees that some
    /// candidate `k` separates every set of `s` monomials.
    pub fn for_bounds(n: usize, sparsity: u64, degree: usize) -> Result<Self> {
        Self::above(2u128 * (sparsity as u128).pow(2) * n.max(1) as u128 + 1, n, degree)
    }

    /// Substitutions with `p0` starting just above `max(2s, n)` and growing
    /// fourfold, ending with [`Substitution::for_bounds`].
    pub fn ladder(n: usize, sparsity: u64, degree: usize) -> Result<Vec<Self>> {
        let last = Self::for_bounds(n, sparsity, degree)?;
        let mut out = Vec::new();
        let mut lo = (2 * sparsity as u128).max(n as u128) + 1;
        while lo < last.p0 as u128 {
            out.push(Self::above(lo, n, degree)?);
            lo *= 4;
        }
        out.push(last);
        Ok(out)
    }

    fn above(lo: u128, n: usize, degree: usize) -> Result<Self> {
        if lo >= 1 << 40 {
            return Err(Error::precondition(
                "sparsity bound too large for the exponent substitution",
            ));
        }
        let p0 = find_prime_in_interval((lo as u64).max(3));
        Ok(Substitution {
            p0,
            max_exponent: n.min(degree).max(1) as u64 * (p0 - 1),
        })
    }

    fn exponents(&self, n: usize, k: u64) -> Vec<u64> {
        let mut e = Vec::with_capacity(n);
        let mut cur = 1 % self.p0;
        for _ in 0..n {
            e.push(cur);
            cur = ((cur as u128 * k as u128) % self.p0 as u128) as u64;
        }
        e
    }

    fn candidates(&self) -> std::ops::RangeInclusive<u64> {
        2..=(self.p0 - 1).max(2)
    }
}

fn berlekamp_massey(seq: &[u64], field: PrimeField) -> Vec<u64> {
    // connection polynomial C with C[0] = 1
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last_disc = 1u64;
    for i in 0..seq.len() {
        let mut d = seq[i];
        for j in 1..=len {
            d = field.add(d, field.mul(c[j], seq[i - j]));
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = field.mul(d, field.inv(last_disc).unwrap());
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, 0);
        }
        for (j, &bj) in b.iter().enumerate() {
            c[j + shift] = field.sub(c[j + shift], field.mul(coef, bj));
        }
        if 2 * len <= i {
            len = i + 1 - len;
            b = prev;
            last_disc = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.resize(len + 1, 0);
    c
}

/// Solves `sum_l x_l nodes_l^j = values_j` for `j < r`.
fn solve_transposed_vandermonde(nodes: &[u64], values: &[u64], field: PrimeField) -> Option<Vec<u64>> {
    let r = nodes.len();
    let mut m: Vec<Vec<u64>> = (0..r)
        .map(|j| {
            let mut row: Vec<u64> = nodes.iter().map(|&z| field.pow(z, j as u64)).collect();
            row.push(values[j]);
            row
        })
        .collect();
    for col in 0..r {
        let pivot = (col..r).find(|&i| m[i][col] != 0)?;
        m.swap(col, pivot);
        let inv = field.inv(m[col][col])?;
        for v in m[col].iter_mut() {
            *v = field.mul(*v, inv);
        }
        for row in 0..r {
            if row != col && m[row][col] != 0 {
                let factor = m[row][col];
                for c in col..=r {
                    let sub = field.mul(factor, m[col][c]);
                    m[row][c] = field.sub(m[row][c], sub);
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[r]).collect())
}

/// Interpolates a multilinear black box with at most `sparsity` terms of
/// degree at most `degree` in `n` variables over `field`.
///
/// For each candidate `k` the black box restricted to `x_i = c_i y^{e_i}` is
/// a sparse univariate polynomial in `y`; its exponents come from
/// Berlekamp-Massey on values at `y = w^j` (`w` a primitive root), its
/// coefficients from a transposed Vandermonde solve, and each variable's
/// membership from re-evaluating with `x_i` doubled. The result is checked
/// against the black box at random points before it is returned.
pub fn sparse_interpolate(
    blackbox: &dyn BlackBox,
    n: usize,
    sparsity: u64,
    degree: usize,
    field: PrimeField,
) -> Result<SparseMultilinear> {
    let subst = Substitution::for_bounds(n, sparsity, degree)?;
    interpolate_with(blackbox, n, sparsity, &subst, field, 0x5eed, None)
}

fn interpolate_with(
    blackbox: &dyn BlackBox,
    n: usize,
    sparsity: u64,
    subst: &Substitution,
    field: PrimeField,
    seed: u64,
    max_candidates: Option<usize>,
) -> Result<SparseMultilinear> {
    let q = field.modulus();
    if q - 1 <= subst.max_exponent {
        return Err(Error::precondition(format!(
            "field too small: q - 1 = {} must exceed the largest exponent {}",
            q - 1,
            subst.max_exponent
        )));
    }
    let w = find_primitive_root(q);
    let s = sparsity as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in subst.candidates().take(max_candidates.unwrap_or(usize::MAX)) {
        let e = subst.exponents(n, k);
        let base: Vec<u64> = e.iter().map(|&ei| field.pow(w, ei)).collect();
        // point j: x_i = w^{j e_i}
        let point = |j: u64| -> Vec<u64> { base.iter().map(|&b| field.pow(b, j)).collect() };
        let points: Vec<Vec<u64>> = (0..2 * s as u64).map(point).collect();
        let values = blackbox.eval_batch(&points);
        let conn = berlekamp_massey(&values, field);
        let r = conn.len() - 1;
        if r > s {
            continue;
        }
        let candidate = if r == 0 {
            Some(SparseMultilinear::default())
        } else {
            recover_terms(blackbox, &conn, &values, &points, &e, subst, field, w)
        };
        let Some(poly) = candidate else { continue };
        let checks: Vec<Vec<u64>> = (0..2)
            .map(|_| (0..n).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        let expect = blackbox.eval_batch(&checks);
        if checks
            .iter()
            .zip(&expect)
            .all(|(pt, &v)| poly.eval(pt, field) == v)
        {
            return Ok(poly);
        }
    }
    Err(Error::inconsistent(
        "no substitution candidate reproduced the black box",
    ))
}

#[allow(clippy::too_many_arguments)]
fn recover_terms(
    blackbox: &dyn BlackBox,
    conn: &[u64],
    values: &[u64],
    points: &[Vec<u64>],
    e: &[u64],
    subst: &Substitution,
    field: PrimeField,
    w: u64,
) -> Option<SparseMultilinear> {
    let r = conn.len() - 1;
    let n = e.len();
    // roots of z^r + c_1 z^{r-1} + ... + c_r are the values w^{E_S}
    let mut nodes = Vec::with_capacity(r);
    let mut exps = Vec::with_capacity(r);
    let mut z = 1u64;
    for exp in 0..=subst.max_exponent {
        let mut acc = 0u64;
        for &c in conn {
            acc = field.add(field.mul(acc, z), c);
        }
        // acc = sum_j c_j z^{r-j}
        if acc == 0 {
            nodes.push(z);
            exps.push(exp);
            if nodes.len() > r {
                return None;
            }
        }
        z = field.mul(z, w);
    }
    if nodes.len() != r {
        return None;
    }
    let coeffs = solve_transposed_vandermonde(&nodes, &values[..r], field)?;
    if coeffs.contains(&0) {
        return None;
    }
    let probes: Vec<Vec<u64>> = (0..n)
        .flat_map(|i| {
            points[..r].iter().map(move |pt| {
                let mut p = pt.clone();
                p[i] = field.add(p[i], p[i]);
                p
            })
        })
        .collect();
    let probe_values = blackbox.eval_batch(&probes);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); r];
    for i in 0..n {
        let doubled = solve_transposed_vandermonde(&nodes, &probe_values[i * r..(i + 1) * r], field)?;
        for l in 0..r {
            if doubled[l] == field.add(coeffs[l], coeffs[l]) {
                members[l].push(i);
            } else if doubled[l] != coeffs[l] {
                return None;
            }
        }
    }
    let mut poly = SparseMultilinear::default();
    for ((set, &c), &exp) in members.into_iter().zip(&coeffs).zip(&exps) {
        let mapped: u64 = set.iter().map(|&i| e[i]).sum();
        if mapped != exp || poly.terms.insert(set, c).is_some() {
            return None;
        }
    }
    Some(poly)
}

/// Field-size policy for [`enumerate_solutions_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumConfig {
    /// Also require `q >= n^12` so interpolation is correct without the
    /// post-hoc checks; only practical for very small `n`.
    pub strict: bool,
    /// Upper bound on `points * q * n` field operations.
    pub budget: Option<u128>,
    /// Seed for the random verification points.
    pub seed: u64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            strict: false,
            budget: None,
            seed: 0x5eed,
        }
    }
}

/// All solutions of an instance with at most `cap` solutions.
pub fn enumerate_solutions(inst: &SsumInstance, cap: u64) -> Result<SolutionSet> {
    enumerate_solutions_with(inst, cap, &EnumConfig::default())
}

/// Field used by the enumeration for `n` participating items: `q` is the
/// smallest prime at least `max(n t + 3, max_exponent + 2)` (and `n^12` in
/// strict mode).
pub fn enumeration_field(n: usize, t: u64, subst: &Substitution, strict: bool) -> Result<PrimeField> {
    let mut lo = (n as u128 * t as u128 + 3).max(subst.max_exponent as u128 + 2);
    if strict {
        lo = lo.max((n as u128).pow(12));
    }
    if lo >= 1 << 62 {
        return Err(Error::precondition("enumeration field exceeds 2^62"));
    }
    PrimeField::new(find_prime_in_interval(lo as u64))
}

/// Substitution candidates tried on each rung below the last.
const LADDER_CANDIDATES: usize = 8;

pub fn enumerate_solutions_with(inst: &SsumInstance, cap: u64, config: &EnumConfig) -> Result<SolutionSet> {
    if cap == 0 {
        return Err(Error::invalid("solution bound k must be at least 1"));
    }
    // items larger than t never take part
    let index: Vec<usize> = (0..inst.n()).filter(|&i| inst.a[i] <= inst.t).collect();
    let items: Vec<u64> = index.iter().map(|&i| inst.a[i]).collect();
    let n = items.len();
    if n == 0 {
        return Ok(if inst.t == 0 {
            SolutionSet::new(vec![Vec::new()])
        } else {
            SolutionSet::default()
        });
    }
    let ladder = if config.strict {
        vec![Substitution::for_bounds(n, cap, n)?]
    } else {
        Substitution::ladder(n, cap, n)?
    };
    let last = ladder.len() - 1;
    let mut found = None;
    for (level, subst) in ladder.iter().enumerate() {
        let field = enumeration_field(n, inst.t, subst, config.strict)?;
        if let Some(budget) = config.budget {
            let points = (2 + (n as u128 + 1) * cap as u128) + 2;
            check_budget(points * field.modulus() as u128 * n as u128, budget)?;
        }
        let oracle = KaneOracle {
            items: &items,
            t: inst.t,
            field,
            generator: find_primitive_root(field.modulus()),
        };
        // short rungs try a few candidates, the last one all of them
        let tries = (level < last).then_some(LADDER_CANDIDATES);
        match interpolate_with(&oracle, n, cap, subst, field, config.seed, tries) {
            Ok(poly) => {
                found = Some(poly);
                break;
            }
            Err(Error::Inconsistent(_)) if level < last => continue,
            Err(e) => return Err(e),
        }
    }
    let poly = found.expect("the last rung returns or errors");
    let mut sets = Vec::with_capacity(poly.len());
    for (set, &c) in &poly.terms {
        let original: Vec<usize> = set.iter().map(|&i| index[i]).collect();
        if c != 1 || !inst.is_solution(&original) {
            return Err(Error::inconsistent(format!(
                "interpolated monomial {original:?} (coefficient {c}) is not a solution"
            )));
        }
        sets.push(original);
    }
    Ok(SolutionSet::new(sets))
}

/// Deterministic decision from Kane sums alone. The count is at most `2^n`,
/// so it cannot vanish modulo `n + 1` distinct primes.
pub fn decide_lowspace(inst: &SsumInstance, budget: u128) -> Result<bool> {
    let items: Vec<u64> = inst.a.iter().copied().filter(|&a| a <= inst.t).collect();
    let reduced = SsumInstance { a: items, t: inst.t };
    let ones = vec![1u64; reduced.n()];
    let degree: u64 = reduced.a.iter().sum();
    let mut q = degree + 3;
    let mut spent = 0u128;
    for _ in 0..=reduced.n() {
        q = find_prime_in_interval(q);
        spent += q as u128 * (reduced.n() as u128 + 1);
        check_budget(spent, budget)?;
        if kane_coeff_eval(&reduced, &ones, PrimeField::new(q)?)? != 0 {
            return Ok(true);
        }
        q += 1;
    }
    Ok(false)
}
