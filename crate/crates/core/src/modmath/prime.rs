//! Primality, factoring, prime search and primitive roots for word-sized moduli.

use std::collections::BTreeMap;

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the first twelve primes as witnesses are
/// sound for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime `q >= lo`. For `lo >= 25` the result lies in `[lo, 6lo/5]`.
///
/// # Panics
/// If no prime below `2^64` is `>= lo`.
pub fn find_prime_in_interval(lo: u64) -> u64 {
    let mut q = lo.max(2);
    while !is_prime(q) {
        q = q.checked_add(1).expect("no 64-bit prime above lower bound");
    }
    q
}

/// Distinct prime divisors of `m`, ascending.
pub(crate) fn distinct_prime_divisors(m: u64) -> Vec<u64> {
    factorize(m).into_keys().collect()
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Prime factorization of `m`: trial division to `10^6`, then Pollard rho
/// with Brent's cycle detection on whatever cofactor is left.
pub fn factorize(mut m: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut d = 2u64;
    while d <= TRIAL_LIMIT && d * d <= m {
        while m % d == 0 {
            *out.entry(d).or_insert(0) += 1;
            m /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut stack = vec![m];
    while let Some(x) = stack.pop() {
        if x == 1 {
            continue;
        }
        if is_prime(x) {
            *out.entry(x).or_insert(0) += 1;
            continue;
        }
        let f = pollard_brent(x);
        stack.push(f);
        stack.push(x / f);
    }
    out
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A nontrivial factor of the odd composite `n`.
fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let mut g = 1;
        let (mut x, mut ys) = (y, y);
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            // the batch overshot; step one at a time from its start
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

/// Smallest residue of multiplicative order exactly `p - 1` modulo the prime `p`.
///
pub fn find_primitive_root(p: u64) -> u64 {
    assert!(is_prime(p), "find_primitive_root needs a prime, got {p}");
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let divisors = distinct_prime_divisors(order);
    (2..p)
        .find(|&g| divisors.iter().all(|&l| pow_mod(g, order / l, p) != 1))
        .expect("every prime field has a generator")
}
