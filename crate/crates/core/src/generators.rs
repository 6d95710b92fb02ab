//! Seeded instance families shared by the benchmarks and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::simulsum::SimulInstance;
use crate::ssum_hamming::SsumInstance;
use crate::subset_product::ProductInstance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` items with exactly four solutions, of sizes 1, 2, 2 and 3:
/// `{t}`, `{3, t-3}`, `{5, t-5}` and `{3, 5, t-8}`. The remaining items lie
/// in `(t/2, t)` away from `t-8`, `t-5` and `t-3`, so any two of them already
/// overshoot and none completes a small item.
///
/// # Panics
/// If `n < 6` or `t < 64`.
pub fn planted_four(n: usize, t: u64, seed: u64) -> SsumInstance {
    assert!(n >= 6 && t >= 64, "planted_four needs n >= 6 and t >= 64");
    let mut rng = rng(seed);
    let mut a = vec![3, 5, t, t - 3, t - 5, t - 8];
    while a.len() < n {
        let x = rng.gen_range(t / 2 + 1..t);
        if ![t - 8, t - 5, t - 3].contains(&x) {
            a.push(x);
        }
    }
    // interleave so the planted items are not all at the front
    for i in (1..a.len()).rev() {
        let j = rng.gen_range(0..=i);
        a.swap(i, j);
    }
    SsumInstance { a, t }
}

/// Uniform `n` in `[1, max_n]`, `t` in `[1, max_t]` and items in `[0, t]`.
pub fn random_ssum(rng: &mut ChaCha8Rng, max_n: usize, max_t: u64) -> SsumInstance {
    let n = rng.gen_range(1..=max_n);
    let t = rng.gen_range(1..=max_t);
    let a = (0..n).map(|_| rng.gen_range(0..=t)).collect();
    SsumInstance { a, t }
}

/// Rows with entries in `[0, t_j]` for targets drawn from `[0, max_t]`.
pub fn random_simul(rng: &mut ChaCha8Rng, max_n: usize, max_k: usize, max_t: u64) -> SimulInstance {
    let n = rng.gen_range(1..=max_n);
    let k = rng.gen_range(1..=max_k);
    let targets: Vec<u64> = (0..k).map(|_| rng.gen_range(0..=max_t)).collect();
    let rows = (0..n)
        .map(|_| targets.iter().map(|&t| rng.gen_range(0..=t)).collect())
        .collect();
    SimulInstance { rows, targets }
}

/// Half of the items are divisors of `t`, the rest uniform in `[1, max_a]`.
pub fn random_product(rng: &mut ChaCha8Rng, max_n: usize, max_a: u64, max_t: u64) -> ProductInstance {
    let n = rng.gen_range(1..=max_n);
    let t = rng.gen_range(1..=max_t);
    let divisors: Vec<u64> = (1..=t).filter(|d| t % d == 0).collect();
    let a = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                divisors[rng.gen_range(0..divisors.len())]
            } else {
                rng.gen_range(1..=max_a)
            }
        })
        .collect();
    ProductInstance { a, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{brute_force_enumerate, dp_enumerate, DEFAULT_ORACLE_BUDGET};

    #[test]
    fn planted_has_four_solutions() {
        for (t, seed) in [(64, 1), (200, 2), (1 << 12, 3)] {
            let inst = planted_four(20, t, seed);
            let sols = if t < 1000 {
                brute_force_enumerate(&inst).unwrap()
            } else {
                dp_enumerate(&inst, DEFAULT_ORACLE_BUDGET).unwrap()
            };
            let mut sizes: Vec<usize> = sols.sets.iter().map(Vec::len).collect();
            sizes.sort();
            assert_eq!(sizes, vec![1, 2, 2, 3]);
        }
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(random_ssum(&mut rng(4), 10, 50), random_ssum(&mut rng(4), 10, 50));
        assert_eq!(planted_four(64, 1 << 12, 9), planted_four(64, 1 << 12, 9));
    }
}
