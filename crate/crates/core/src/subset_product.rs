//! Subset Product: exponent-space reduction to SimulSubsetSum, the randomized
//! solver on top of it, pseudo-prime-factor sets, and a low-space solver built
//! on the multivariate Kane identity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::modmath::{factorize, is_prime, PrimeField};
use crate::simulsum::{simul_decide, SimulDecision, SimulInstance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductInstance {
    pub a: Vec<u64>,
    pub t: u64,
}

impl ProductInstance {
    pub fn new(a: Vec<u64>, t: u64) -> Result<Self> {
        if t == 0 || a.contains(&0) {
            return Err(Error::invalid("subset product entries and target must be positive"));
        }
        Ok(ProductInstance { a, t })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn is_solution(&self, set: &[usize]) -> bool {
        let mut prod = 1u128;
        for &i in set {
            let Some(&v) = self.a.get(i) else { return false };
            prod *= v as u128;
            if prod > self.t as u128 {
                return false;
            }
        }
        prod == self.t as u128
    }

    /// Indices of entries dividing `t`; no other entry can be in a solution.
    pub fn divisor_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.t % self.a[i] == 0).collect()
    }
}

/// Largest `e` with `b^e | a`, and `a // b = a / b^e`.
pub fn split_power(mut a: u64, b: u64) -> (u32, u64) {
    debug_assert!(b >= 2);
    let mut e = 0;
    while a % b == 0 {
        a /= b;
        e += 1;
    }
    (e, a)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PseudoPrimeFactorization {
    /// Pairwise coprime, ascending.
    pub base: Vec<u64>,
    /// Row `i` gives input `i` as `prod_j base_j^{exponents[i][j]}`.
    pub exponents: Vec<Vec<u32>>,
    /// Number of gcd-splitting rounds taken.
    pub depth: usize,
}

impl PseudoPrimeFactorization {
    pub fn exponent_row(&self, x: u64) -> Option<Vec<u32>> {
        exponents_over(&self.base, x)
    }
}

fn exponents_over(base: &[u64], mut x: u64) -> Option<Vec<u32>> {
    let row = base
        .iter()
        .map(|&b| {
            let (e, rest) = split_power(x, b);
            x = rest;
            e
        })
        .collect();
    (x == 1).then_some(row)
}

/// Sorts, removes 1s and duplicates, then replaces every other entry by
/// `a_i // a_1`, repeating until the list is stable.
fn normalize(items: &mut Vec<u64>) {
    loop {
        items.retain(|&x| x != 1);
        let mut seen = Vec::with_capacity(items.len());
        for &x in items.iter() {
            if !seen.contains(&x) {
                seen.push(x);
            }
        }
        *items = seen;
        let Some(&first) = items.first() else { return };
        let mut changed = false;
        for x in items.iter_mut().skip(1) {
            let (e, rest) = split_power(*x, first);
            if e > 0 {
                *x = rest;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Pseudo-prime-factor set of the inputs by gcd splitting. Each round either
/// retires a first element coprime to the rest or replaces the list by
/// `(g, a_1 // g, ..., a_n // g)` for `g = gcd(a_1, a_i)`; both at least halve
/// the product of the working list.
pub fn pseudo_prime_factor_set(inputs: &[u64]) -> Result<PseudoPrimeFactorization> {
    if inputs.contains(&0) {
        return Err(Error::invalid("pseudo-prime-factor set of zero"));
    }
    let mut work: Vec<u64> = inputs.to_vec();
    let mut base = Vec::new();
    let mut depth = 0;
    normalize(&mut work);
    while let Some(&first) = work.first() {
        depth += 1;
        match work[1..].iter().map(|&x| gcd(first, x)).find(|&g| g != 1) {
            None => {
                base.push(first);
                work.remove(0);
            }
            Some(g) => {
                let mut next = vec![g];
                next.extend(work.iter().map(|&x| split_power(x, g).1));
                work = next;
            }
        }
        normalize(&mut work);
    }
    base.sort_unstable();
    let exponents = inputs
        .iter()
        .map(|&x| {
            exponents_over(&base, x)
                .ok_or_else(|| Error::inconsistent(format!("{x} does not factor over {base:?}")))
        })
        .collect::<Result<_>>()?;
    Ok(PseudoPrimeFactorization { base, exponents, depth })
}

/// SimulSubsetSum instance in exponent space over some factor base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductReduction {
    pub simul: SimulInstance,
    pub base: Vec<u64>,
    /// Original index of each row of `simul`.
    pub kept: Vec<usize>,
    /// Entries not dividing `t`.
    pub dropped: Vec<usize>,
}

impl ProductReduction {
    pub fn lift(&self, set: &[usize]) -> Vec<usize> {
        set.iter().map(|&i| self.kept[i]).collect()
    }
}

fn reduce_over(inst: &ProductInstance, base: Vec<u64>) -> Result<ProductReduction> {
    let kept = inst.divisor_indices();
    let dropped = (0..inst.n()).filter(|i| !kept.contains(i)).collect();
    let row = |x: u64| -> Result<Vec<u64>> {
        let r = exponents_over(&base, x)
            .ok_or_else(|| Error::inconsistent(format!("{x} does not factor over the base")))?;
        Ok(r.into_iter().map(u64::from).collect())
    };
    let rows = kept.iter().map(|&i| row(inst.a[i])).collect::<Result<_>>()?;
    let targets = row(inst.t)?;
    Ok(ProductReduction {
        simul: SimulInstance::new(rows, targets)?,
        base,
        kept,
        dropped,
    })
}

/// Reduction over a pseudo-prime-factor set of the dividing entries and `t`;
/// deterministic polynomial time, no factoring.
pub fn reduce_to_simul(inst: &ProductInstance) -> Result<ProductReduction> {
    let mut inputs: Vec<u64> = inst.divisor_indices().iter().map(|&i| inst.a[i]).collect();
    inputs.push(inst.t);
    let ppf = pseudo_prime_factor_set(&inputs)?;
    reduce_over(inst, ppf.base)
}

/// Reduction over the prime factors of `t`.
pub fn reduce_to_simul_prime(inst: &ProductInstance) -> Result<ProductReduction> {
    reduce_over(inst, factorize(inst.t).into_keys().collect())
}

pub fn product_decide(inst: &ProductInstance, seed: u64) -> Result<SimulDecision> {
    let red = reduce_to_simul_prime(inst)?;
    simul_decide(&red.simul, seed)
}

/// `(-1)^k sum_{x in (F_q^*)^k} f(x) prod_j x_j^{q-1-t_j}`, which is the
/// coefficient of `x^t` in `f` whenever `q - 1` exceeds every individual
/// degree of `f` and every `t_j`.
pub fn kane_multivariate_sum<F>(f: F, targets: &[u64], field: PrimeField) -> u64
where
    F: Fn(&[u64]) -> u64 + Sync,
{
    let q = field.modulus();
    let k = targets.len();
    if k == 0 {
        return f(&[]);
    }
    let shifts: Vec<u64> = targets.iter().map(|&t| (q - 1 - t % (q - 1)) % (q - 1)).collect();
    let total = (1..q)
        .into_par_iter()
        .map(|x0| {
            let mut point = vec![1u64; k];
            point[0] = x0;
            let mut acc = 0u64;
            loop {
                let mono = point
                    .iter()
                    .zip(&shifts)
                    .fold(1, |m, (&x, &s)| field.mul(m, field.pow(x, s)));
                acc = field.add(acc, field.mul(mono, f(&point)));
                // odometer over coordinates 1..k
                let mut j = k;
                loop {
                    j -= 1;
                    if j == 0 {
                        return acc;
                    }
                    if point[j] + 1 < q {
                        point[j] += 1;
                        break;
                    }
                    point[j] = 1;
                }
            }
        })
        .reduce(|| 0, |a, b| field.add(a, b));
    if k % 2 == 1 {
        field.neg(total)
    } else {
        total
    }
}

/// Coefficient of `x^targets` in `prod_i (1 + prod_j x_j^{a_ij})` over `field`.
pub fn kane_coeff_multivar(inst: &SimulInstance, field: PrimeField) -> Result<u64> {
    let q = field.modulus() as u128;
    for (j, &t) in inst.targets.iter().enumerate() {
        let degree: u128 = inst.rows.iter().map(|r| r[j] as u128).sum();
        if t as u128 > degree {
            return Ok(0);
        }
        if q <= degree + 1 {
            return Err(Error::precondition(format!(
                "q = {q} must exceed individual degree {degree} + 1"
            )));
        }
    }
    let f = |x: &[u64]| {
        inst.rows.iter().fold(1u64, |acc, row| {
            let m = x.iter().zip(row).fold(1, |m, (&xv, &e)| field.mul(m, field.pow(xv, e)));
            field.mul(acc, field.add(1, m))
        })
    };
    Ok(kane_multivariate_sum(f, &inst.targets, field))
}

/// `j`-th smallest prime dividing `t` (0-based), by trial division.
fn nth_prime_factor(mut t: u64, j: usize) -> Option<u64> {
    let mut seen = 0;
    let mut d = 2u64;
    while d * d <= t {
        if t % d == 0 {
            if seen == j {
                return Some(d);
            }
            seen += 1;
            while t % d == 0 {
                t /= d;
            }
        }
        d += 1;
    }
    (t > 1 && seen == j).then_some(t)
}

fn count_prime_factors(t: u64) -> usize {
    (0..).take_while(|&j| nth_prime_factor(t, j).is_some()).count()
}

/// Point `index` of `(F_q^*)^k` in mixed radix, coordinate `j`.
fn coordinate(index: u128, j: usize, q: u64) -> u64 {
    ((index / (q as u128 - 1).pow(j as u32)) % (q as u128 - 1)) as u64 + 1
}

/// One Kane sum of the low-space decision: every exponent `e_ij` and `t_j` is
/// recomputed from `a` and `t` on use, and nothing is allocated.
pub fn lowspace_coefficient(a: &[u64], t: u64, field: PrimeField) -> u64 {
    let q = field.modulus();
    let k = count_prime_factors(t);
    let points = (q as u128 - 1).pow(k as u32);
    let mut c = 0u64;
    for index in 0..points {
        let mut prod_x1 = 1u64;
        for j in 0..k {
            let p = nth_prime_factor(t, j).unwrap();
            let (tj, _) = split_power(t, p);
            let y = coordinate(index, j, q);
            prod_x1 = field.mul(prod_x1, field.pow(y, q - 1 - tj as u64));
        }
        let mut f = 1u64;
        for &ai in a {
            if t % ai != 0 {
                continue;
            }
            let mut prod_x2 = 1u64;
            for j in 0..k {
                let p = nth_prime_factor(t, j).unwrap();
                let (e, _) = split_power(ai, p);
                prod_x2 = field.mul(prod_x2, field.pow(coordinate(index, j, q), e as u64));
            }
            f = field.mul(f, field.add(1, prod_x2));
        }
        c = field.add(c, field.mul(f, prod_x1));
    }
    if k % 2 == 1 {
        field.neg(c)
    } else {
        c
    }
}

pub const DEFAULT_LOWSPACE_BUDGET: u128 = 1 << 32;

/// Deterministic low-space decision. Primes `q >= N + 2` with
/// `N = ceil(n log2 t)` are tried in order; a nonzero coefficient means YES,
/// and `n + 1` zero coefficients mean the true count (at most `2^n`) is zero.
pub fn product_decide_lowspace(inst: &ProductInstance, budget: u128) -> Result<bool> {
    let t = inst.t;
    if t == 1 {
        return Ok(true);
    }
    let n = inst.a.iter().filter(|&&x| t % x == 0).count() as u64;
    if n == 0 {
        return Ok(false);
    }
    let k = count_prime_factors(t) as u32;
    let big_n = (n as f64 * (t as f64).log2()).ceil() as u64;
    let mut q = big_n + 2;
    let mut spent = 0u128;
    for _ in 0..=n {
        while !is_prime(q) {
            q += 1;
        }
        spent += (q as u128 - 1).pow(k) * (n as u128 + 1) * k as u128;
        check_budget(spent, budget)?;
        if lowspace_coefficient(&inst.a, t, PrimeField::new(q)?) != 0 {
            return Ok(true);
        }
        q += 1;
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(a: &[u64], t: u64) -> ProductInstance {
        ProductInstance::new(a.to_vec(), t).unwrap()
    }

    fn brute(inst: &ProductInstance) -> bool {
        (0u32..1 << inst.n()).any(|mask| {
            let set: Vec<usize> = (0..inst.n()).filter(|&i| mask >> i & 1 == 1).collect();
            inst.is_solution(&set)
        })
    }

    #[test]
    fn ppf_examples() {
        assert_eq!(pseudo_prime_factor_set(&[7]).unwrap().base, vec![7]);
        let p = pseudo_prime_factor_set(&[12, 18]).unwrap();
        assert_eq!(p.base, vec![2, 3]);
        assert_eq!(p.exponents, vec![vec![2, 1], vec![1, 2]]);
        assert_eq!(pseudo_prime_factor_set(&[6, 35]).unwrap().base, vec![6, 35]);
        assert_eq!(pseudo_prime_factor_set(&[1, 1]).unwrap().base, Vec::<u64>::new());
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_to_simul(&inst(&[2, 3, 6, 5], 30)).unwrap();
        assert_eq!(r.base, vec![2, 3, 5]);
        assert_eq!(r.simul.rows, vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 1]]);
        assert_eq!(r.simul.targets, vec![1, 1, 1]);

        let r = reduce_to_simul(&inst(&[4], 2)).unwrap();
        assert!(r.simul.rows.is_empty());
        assert_eq!(r.simul.targets, vec![1]);
        assert_eq!(r.dropped, vec![0]);

        let r = reduce_to_simul(&inst(&[4, 5], 1)).unwrap();
        assert!(r.simul.targets.is_empty());
    }

    #[test]
    fn decide_examples() {
        assert!(product_decide(&inst(&[2, 3, 6, 5], 30), 0).unwrap().yes);
        assert!(!product_decide(&inst(&[2, 3, 6, 5], 7), 0).unwrap().yes);
        assert!(product_decide(&inst(&[9, 4], 1), 0).unwrap().yes);

        let b = DEFAULT_LOWSPACE_BUDGET;
        assert!(product_decide_lowspace(&inst(&[2, 3], 6), b).unwrap());
        assert!(!product_decide_lowspace(&inst(&[2, 2], 8), b).unwrap());
        assert!(product_decide_lowspace(&inst(&[5], 5), b).unwrap());
        assert!(matches!(
            product_decide_lowspace(&inst(&[2, 3, 5, 7, 11], 2310), 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn kane_multivar_examples() {
        let f5 = PrimeField::new(5).unwrap();
        let s = SimulInstance::new(vec![vec![1, 1]], vec![1, 1]).unwrap();
        assert_eq!(kane_coeff_multivar(&s, f5).unwrap(), 1);
        let s = SimulInstance::new(vec![vec![1, 1]], vec![0, 0]).unwrap();
        assert_eq!(kane_coeff_multivar(&s, f5).unwrap(), 1);
        let s = SimulInstance::new(vec![vec![1, 1]], vec![2, 0]).unwrap();
        assert_eq!(kane_coeff_multivar(&s, f5).unwrap(), 0);
        let s = SimulInstance::new(vec![vec![4, 0]], vec![4, 0]).unwrap();
        assert!(kane_coeff_multivar(&s, f5).is_err());
    }

    #[test]
    fn lowspace_matches_brute_force_small() {
        for t in 1..=50u64 {
            if count_prime_factors(t) > 2 {
                continue;
            }
            for seed in 0..6u64 {
                let n = 1 + (seed as usize % 4);
                let a: Vec<u64> = (0..n).map(|i| 1 + (t * 7 + seed * 13 + i as u64 * 5) % 12).collect();
                let pi = inst(&a, t);
                assert_eq!(product_decide_lowspace(&pi, DEFAULT_LOWSPACE_BUDGET).unwrap(), brute(&pi), "{a:?} {t}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn ppf_invariants(inputs in prop::collection::vec(1u64..=1_000_000_000, 1..8)) {
            let p = pseudo_prime_factor_set(&inputs).unwrap();
            for (u, &x) in p.base.iter().enumerate() {
                prop_assert!(x >= 2);
                for &y in &p.base[u + 1..] {
                    prop_assert_eq!(gcd(x, y), 1);
                }
            }
            for (row, &x) in p.exponents.iter().zip(&inputs) {
                let prod: u128 = p.base.iter().zip(row).map(|(&b, &e)| (b as u128).pow(e)).product();
                prop_assert_eq!(prod, x as u128);
            }
            let mut primes = std::collections::BTreeSet::new();
            for &x in &inputs {
                primes.extend(factorize(x).into_keys());
            }
            prop_assert!(p.base.len() <= primes.len());
            let bits: u32 = inputs.iter().map(|&x| 64 - x.leading_zeros()).sum();
            prop_assert!(p.depth <= bits as usize);
        }

        #[test]
        fn reduction_preserves_solutions(
            a in prop::collection::vec(1u64..=30, 1..=8),
            t in 1u64..=400,
        ) {
            let pi = inst(&a, t);
            let r = reduce_to_simul(&pi).unwrap();
            for mask in 0u32..1 << r.simul.n() {
                let set: Vec<usize> = (0..r.simul.n()).filter(|&i| mask >> i & 1 == 1).collect();
                prop_assert_eq!(r.simul.is_solution(&set), pi.is_solution(&r.lift(&set)));
            }
        }

        #[test]
        fn multivar_kane_matches_large_prime(
            rows in prop::collection::vec(prop::collection::vec(0u64..=2, 2), 1..=5),
            targets in prop::collection::vec(0u64..=4, 2),
        ) {
            let s = SimulInstance::new(rows.clone(), targets.clone()).unwrap();
            let field = PrimeField::new(67).unwrap();
            let mut count = 0u64;
            for mask in 0u32..1 << rows.len() {
                let set: Vec<usize> = (0..rows.len()).filter(|&i| mask >> i & 1 == 1).collect();
                count += s.is_solution(&set) as u64;
            }
            prop_assert_eq!(kane_coeff_multivar(&s, field).unwrap(), count);
        }
    }
}
