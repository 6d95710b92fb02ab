//! Exact solution counts and hamming weights of Subset Sum instances with few
//! solutions.
//!
//! With `mu` a primitive root of `F_q`, the coefficient of `x^t` in
//! `prod_i (1 + mu^j x^{a_i})` is `sum_S mu^{j |S|}` over the solutions `S`,
//! i.e. the `j`-th power sum of the values `mu^{|S|}`. Newton's identities turn
//! `m` of these into the polynomial whose roots are exactly those values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modmath::{
    find_prime_in_interval, find_primitive_root, poly_divrem, poly_mul_mod, ModPoly, PrimeField,
};
use crate::series::{log_product_coeffs, newton_e_from_p, series_exp, ProductSpec};

/// Largest target accepted by the dense series solvers.
pub const MAX_SERIES_TARGET: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsumInstance {
    pub a: Vec<u64>,
    pub t: u64,
}

impl SsumInstance {
    pub fn new(a: Vec<u64>, t: u64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("subset sum instance needs at least one item"));
        }
        Ok(SsumInstance { a, t })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Whether the index set sums to the target.
    pub fn is_solution(&self, set: &[usize]) -> bool {
        let mut sum = 0u128;
        for &i in set {
            match self.a.get(i) {
                Some(&v) => sum += v as u128,
                None => return false,
            }
        }
        sum == self.t as u128
    }

    /// Number of zero items and the nonzero items that can take part in a solution.
    pub(crate) fn split_items(&self) -> (usize, Vec<u64>) {
        let zeros = self.a.iter().filter(|&&v| v == 0).count();
        let items = self
            .a
            .iter()
            .copied()
            .filter(|&v| v != 0 && v <= self.t)
            .collect();
        (zeros, items)
    }
}

/// Distinct solution weights `w` with multiplicities, ascending by weight.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub entries: Vec<(usize, u64)>,
}

impl WeightProfile {
    pub fn weights(&self) -> Vec<usize> {
        self.entries.iter().map(|&(w, _)| w).collect()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    /// Builds a profile from a list of weights, one per solution.
    pub fn from_weights(weights: impl IntoIterator<Item = usize>) -> Self {
        let mut hist = std::collections::BTreeMap::new();
        for w in weights {
            *hist.entry(w).or_insert(0u64) += 1;
        }
        WeightProfile {
            entries: hist.into_iter().collect(),
        }
    }
}

pub(crate) fn check_series_target(t: u64) -> Result<usize> {
    if t > MAX_SERIES_TARGET {
        return Err(Error::precondition(format!(
            "target {t} exceeds the dense series limit {MAX_SERIES_TARGET}"
        )));
    }
    Ok(t as usize)
}

/// The field used by the counting and hamming routines: smallest prime at
/// least `max(25, n + cap + t)`.
pub fn hamming_field(n: usize, cap: u64, t: u64) -> Result<PrimeField> {
    if cap == 0 {
        return Err(Error::invalid("solution bound k must be at least 1"));
    }
    let lo = (n as u128 + cap as u128 + t as u128).max(25);
    if lo >= 1u128 << 62 {
        return Err(Error::precondition("n + k + t must stay below 2^62"));
    }
    PrimeField::new(find_prime_in_interval(lo as u64))
}

/// `coef_{x^t} prod_i (1 + c x^{a_i})` for `c = scale^exp`, with zero items
/// contributing the constant `(1 + c)`.
fn scaled_coefficient(
    zeros: usize,
    items: &[u64],
    t: usize,
    scale: u64,
    exp: u64,
    field: PrimeField,
) -> Result<u64> {
    let c = field.pow(scale, exp);
    let constant = field.pow(field.add(1, c), zeros as u64);
    if constant == 0 {
        return Ok(0);
    }
    let spec = ProductSpec {
        exponents: items.to_vec(),
        scale_base: scale as i64,
        scale_exp: exp,
        sign: crate::series::FactorSign::Plus,
    };
    let log = log_product_coeffs(&spec, t, field)?;
    let prod = series_exp(&log, t)?;
    Ok(field.mul(constant, prod.coeff(t)))
}

/// Exact number of solutions, assuming there are at most `cap`.
pub fn count_solutions_mod(inst: &SsumInstance, cap: u64) -> Result<u64> {
    let field = hamming_field(inst.n(), cap, inst.t)?;
    let t = check_series_target(inst.t)?;
    let (zeros, items) = inst.split_items();
    if t == 0 {
        return 1u64
            .checked_shl(zeros as u32)
            .filter(|_| zeros < 64)
            .ok_or_else(|| Error::precondition("2^zeros solutions overflow 64 bits"));
    }
    scaled_coefficient(zeros, &items, t, 1, 0, field)
}

/// Distinct hamming weights of all solutions.
pub fn hamming_weights(inst: &SsumInstance, cap: u64) -> Result<Vec<usize>> {
    Ok(weight_multiplicities(inst, cap)?.weights())
}

/// Full weight profile of the solutions.
pub fn weight_multiplicities(inst: &SsumInstance, cap: u64) -> Result<WeightProfile> {
    let field = hamming_field(inst.n(), cap, inst.t)?;
    let t = check_series_target(inst.t)?;
    let (zeros, items) = inst.split_items();
    if t == 0 {
        // the solutions are exactly the subsets of the zero items
        let mut entries = Vec::with_capacity(zeros + 1);
        let mut binom = 1u64;
        for w in 0..=zeros {
            entries.push((w, binom));
            binom = binom
                .checked_mul((zeros - w) as u64)
                .map(|v| v / (w as u64 + 1))
                .ok_or_else(|| Error::precondition("solution count overflows 64 bits"))?;
        }
        return Ok(WeightProfile { entries });
    }
    let m = scaled_coefficient(zeros, &items, t, 1, 0, field)?;
    if m == 0 {
        return Ok(WeightProfile::default());
    }
    let mu = find_primitive_root(field.modulus());
    let power_sums: Vec<u64> = (1..=m)
        .into_par_iter()
        .map(|j| scaled_coefficient(zeros, &items, t, mu, j, field))
        .collect::<Result<_>>()?;
    profile_from_power_sums(&power_sums, field, mu, inst.n())
}

/// `g(x) = sum_j (-1)^j E_j x^{m-j}`, monic of degree `m`, whose roots are the
/// values whose power sums were given.
pub fn vieta_polynomial(power_sums: &[u64], field: PrimeField) -> Result<ModPoly> {
    let m = power_sums.len();
    let e = newton_e_from_p(power_sums, field)?;
    let mut coeffs = vec![0u64; m + 1];
    coeffs[m] = 1;
    for j in 1..=m {
        coeffs[m - j] = if j % 2 == 0 { e[j - 1] } else { field.neg(e[j - 1]) };
    }
    Ok(ModPoly::new(field, coeffs))
}

/// Recovers the weight profile from power sums `P_j = sum_S mu^{j w(S)}`,
/// `j = 1..m`, searching weights `1..=max_weight`.
pub(crate) fn profile_from_power_sums(
    power_sums: &[u64],
    field: PrimeField,
    mu: u64,
    max_weight: usize,
) -> Result<WeightProfile> {
    let m = power_sums.len() as u64;
    let g = vieta_polynomial(power_sums, field)?;
    let mut entries = Vec::new();
    let mut root = 1u64;
    for w in 1..=max_weight {
        root = field.mul(root, mu);
        if g.eval(root) == 0 {
            entries.push((w, root_multiplicity(&g, root, m)?));
        }
    }
    let profile = WeightProfile { entries };
    if profile.total() != m {
        return Err(Error::inconsistent(format!(
            "recovered {} solutions out of {m}; the solution bound is probably violated",
            profile.total()
        )));
    }
    Ok(profile)
}

fn linear_power(root: u64, e: u64, field: PrimeField) -> Result<ModPoly> {
    let lin = ModPoly::new(field, vec![field.neg(root), 1]);
    let mut result = ModPoly::one(field);
    let mut base = lin;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mul_mod(&result, &base, None)?;
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul_mod(&base, &base, None)?;
        }
    }
    Ok(result)
}

/// Largest `l` with `(x - root)^l | g`, for a root already known to divide.
fn root_multiplicity(g: &ModPoly, root: u64, bound: u64) -> Result<u64> {
    let field = g.field();
    let divides = |l: u64| -> Result<bool> {
        let (_, r) = poly_divrem(g, &linear_power(root, l, field)?)?;
        Ok(r.is_zero())
    };
    let (mut lo, mut hi) = (1u64, bound);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if divides(mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(a: &[u64], t: u64) -> SsumInstance {
        SsumInstance::new(a.to_vec(), t).unwrap()
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_solutions_mod(&inst(&[3, 1, 2], 3), 4).unwrap(), 2);
        assert_eq!(count_solutions_mod(&inst(&[1], 2), 1).unwrap(), 0);
        assert_eq!(count_solutions_mod(&inst(&[2, 2, 2, 3], 4), 4).unwrap(), 3);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(hamming_weights(&inst(&[3, 1, 2], 3), 4).unwrap(), vec![1, 2]);
        assert_eq!(hamming_weights(&inst(&[2, 2, 2, 3], 4), 4).unwrap(), vec![2]);
        assert!(hamming_weights(&inst(&[1], 2), 1).unwrap().is_empty());
    }

    #[test]
    fn multiplicity_examples() {
        let p = weight_multiplicities(&inst(&[2, 2, 2, 3], 4), 4).unwrap();
        assert_eq!(p.entries, vec![(2, 3)]);
        let p = weight_multiplicities(&inst(&[3, 1, 2], 3), 4).unwrap();
        assert_eq!(p.entries, vec![(1, 1), (2, 1)]);
        assert!(weight_multiplicities(&inst(&[5, 7], 3), 2).unwrap().entries.is_empty());
    }

    #[test]
    fn zero_target_and_zero_items() {
        assert_eq!(weight_multiplicities(&inst(&[1, 2], 0), 1).unwrap().entries, vec![(0, 1)]);
        let p = weight_multiplicities(&inst(&[0, 0, 4], 0), 4).unwrap();
        assert_eq!(p.entries, vec![(0, 1), (1, 2), (2, 1)]);
        // {4}, {0,4}
        let p = weight_multiplicities(&inst(&[0, 4, 9], 4), 2).unwrap();
        assert_eq!(p.entries, vec![(1, 1), (2, 1)]);
        assert_eq!(count_solutions_mod(&inst(&[0, 0, 1], 1), 4).unwrap(), 4);
    }

    #[test]
    fn vieta_reconstruction() {
        let field = PrimeField::new(101).unwrap();
        let roots = [3u64, 3, 7, 50];
        let p: Vec<u64> = (1..=roots.len() as u64)
            .map(|j| roots.iter().fold(0, |acc, &r| field.add(acc, field.pow(r, j))))
            .collect();
        let g = vieta_polynomial(&p, field).unwrap();
        let mut expect = ModPoly::one(field);
        for &r in &roots {
            let lin = ModPoly::new(field, vec![field.neg(r), 1]);
            expect = poly_mul_mod(&expect, &lin, None).unwrap();
        }
        assert!(g.same_as(&expect));
        assert_eq!(root_multiplicity(&g, 3, 4).unwrap(), 2);
        assert_eq!(root_multiplicity(&g, 50, 4).unwrap(), 1);
    }

    #[test]
    fn deterministic() {
        let i = inst(&[5, 9, 4, 13, 8, 1, 3], 17);
        assert_eq!(
            weight_multiplicities(&i, 16).unwrap(),
            weight_multiplicities(&i, 16).unwrap()
        );
    }
}
