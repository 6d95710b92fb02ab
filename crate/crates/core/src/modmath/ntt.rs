//! Exact convolution over an arbitrary prime field.
//!
//! Residues are lifted to integers, convolved modulo up to three 62-bit
//! NTT-friendly primes (Montgomery arithmetic), recombined with Garner's
//! algorithm and reduced into the target field. The number of transform primes
//! is the smallest that bounds `min(len) * (p - 1)^2`.

use super::prime::mul_mod;

const SCHOOLBOOK_BELOW: usize = 64;

struct NttPrime {
    p: u64,
    /// -p^{-1} mod 2^64
    neg_inv: u64,
    /// 2^128 mod p
    r2: u64,
    generator: u64,
    two_adicity: u32,
}

impl NttPrime {
    const fn new(p: u64, generator: u64, two_adicity: u32) -> Self {
        // Newton iteration for p^{-1} mod 2^64
        let mut inv = 1u64;
        let mut i = 0;
        while i < 7 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
            i += 1;
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        NttPrime {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
            generator,
            two_adicity,
        }
    }

    #[inline(always)]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        // branch-free conditional subtraction; all values stay below 2^63
        u.min(u.wrapping_sub(self.p))
    }

    #[inline(always)]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    /// Valid for any `a < 2^64` since `a * r2 < 2^64 p`.
    #[inline(always)]
    fn to_mont(&self, a: u64) -> u64 {
        self.mul(a, self.r2)
    }

    #[inline(always)]
    fn from_mont(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    #[inline(always)]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        s.min(s.wrapping_sub(self.p))
    }

    #[inline(always)]
    fn sub(&self, a: u64, b: u64) -> u64 {
        let d = a.wrapping_sub(b);
        d.min(d.wrapping_add(self.p))
    }

    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = self.to_mont(1);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Twiddles for a transform of length `n`: entry `h + j` holds `w_{2h}^j`
    /// for every stage half-length `h`.
    fn twiddles(&self, n: usize, inverse: bool) -> Vec<u64> {
        let mut table = vec![0u64; n.max(1)];
        let g = self.to_mont(self.generator);
        let mut half = 1;
        while half < n {
            let mut w = self.pow(g, (self.p - 1) / (2 * half) as u64);
            if inverse {
                w = self.pow(w, self.p - 2);
            }
            let mut cur = self.to_mont(1);
            for slot in &mut table[half..2 * half] {
                *slot = cur;
                cur = self.mul(cur, w);
            }
            half <<= 1;
        }
        table
    }

    /// Decimation in frequency: natural order in, bit-reversed order out.
    fn forward(&self, a: &mut [u64], tw: &[u64]) {
        let n = a.len();
        let mut half = n / 2;
        while half >= 1 {
            let w = &tw[half..2 * half];
            for chunk in a.chunks_exact_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let (u, v) = (*x, *y);
                    *x = self.add(u, v);
                    *y = self.mul(self.sub(u, v), t);
                }
            }
            half >>= 1;
        }
    }

    /// Decimation in time with inverse twiddles: bit-reversed in, natural out.
    /// The `1/n` scaling is left to the caller.
    fn backward(&self, a: &mut [u64], tw: &[u64]) {
        let n = a.len();
        let mut half = 1;
        while half < n {
            let w = &tw[half..2 * half];
            for chunk in a.chunks_exact_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let u = *x;
                    let v = self.mul(*y, t);
                    *x = self.add(u, v);
                    *y = self.sub(u, v);
                }
            }
            half <<= 1;
        }
    }
}

static PRIMES: [NttPrime; 3] = [
    NttPrime::new(4_179_340_454_199_820_289, 3, 57),
    NttPrime::new(2_485_986_994_308_513_793, 5, 55),
    NttPrime::new(2_936_346_957_045_563_393, 3, 54),
];

fn schoolbook(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    if p <= 1 << 32 {
        // products fit in u64; accumulate a few before reducing
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (o, &y) in out[i..].iter_mut().zip(b) {
                *o = (*o + x * y) % p;
            }
        }
    } else {
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (o, &y) in out[i..].iter_mut().zip(b) {
                let s = *o as u128 + x as u128 * y as u128;
                *o = (s % p as u128) as u64;
            }
        }
    }
    out
}

fn primes_needed(shorter: usize, p: u64) -> usize {
    // bits of shorter * (p-1)^2, rounded up
    let bits = 64 - (shorter as u64).leading_zeros() + 2 * (64 - (p - 1).leading_zeros());
    let mut have = 0u32;
    for (i, prime) in PRIMES.iter().enumerate() {
        have += 63 - prime.p.leading_zeros(); // floor(log2 P)
        if bits <= have {
            return i + 1;
        }
    }
    panic!("modulus too large for three-prime convolution")
}

struct Tables {
    forward: Vec<u64>,
    backward: Vec<u64>,
    /// `1/n` in Montgomery form, folded into the final conversion
    n_inv: u64,
}

/// Cyclic convolution of a fixed power-of-two length modulo an arbitrary prime.
pub(crate) struct Plan {
    size: usize,
    modulus: u64,
    tables: Vec<Tables>,
}

/// Transformed operand of a [`Plan`], one vector per transform prime.
pub(crate) struct Spectrum(Vec<Vec<u64>>);

impl Plan {
    /// `max_terms` bounds the number of products summed into one output entry.
    pub(crate) fn new(size: usize, max_terms: usize, modulus: u64) -> Self {
        assert!(size.is_power_of_two());
        let count = primes_needed(max_terms.max(1), modulus);
        let tables = PRIMES[..count]
            .iter()
            .map(|prime| {
                assert!(size.trailing_zeros() <= prime.two_adicity);
                let n_inv = prime.pow(prime.to_mont(size as u64), prime.p - 2);
                Tables {
                    forward: prime.twiddles(size, false),
                    backward: prime.twiddles(size, true),
                    n_inv,
                }
            })
            .collect();
        Plan {
            size,
            modulus,
            tables,
        }
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    /// Transforms `a` (at most `size` residues, zero padded).
    pub(crate) fn forward(&self, a: &[u64]) -> Spectrum {
        assert!(a.len() <= self.size);
        Spectrum(
            PRIMES
                .iter()
                .zip(&self.tables)
                .map(|(prime, tab)| {
                    let mut v = vec![0u64; self.size];
                    for (dst, &x) in v.iter_mut().zip(a) {
                        *dst = prime.to_mont(x);
                    }
                    prime.forward(&mut v, &tab.forward);
                    v
                })
                .collect(),
        )
    }

    /// Cyclic product of two transformed operands, reduced modulo the field prime.
    pub(crate) fn multiply(&self, x: &Spectrum, y: &Spectrum) -> Vec<u64> {
        let residues: Vec<Vec<u64>> = PRIMES
            .iter()
            .zip(&self.tables)
            .zip(x.0.iter().zip(&y.0))
            .map(|((prime, tab), (fx, fy))| {
                let mut v: Vec<u64> = fx.iter().zip(fy).map(|(&a, &b)| prime.mul(a, b)).collect();
                prime.backward(&mut v, &tab.backward);
                for e in v.iter_mut() {
                    *e = prime.from_mont(prime.mul(*e, tab.n_inv));
                }
                v
            })
            .collect();
        if residues.len() == 1 {
            let mut r = residues.into_iter().next().unwrap();
            let m = self.modulus;
            let barrett = u64::MAX / m;
            for e in r.iter_mut() {
                let q = ((*e as u128 * barrett as u128) >> 64) as u64;
                let mut v = *e - q * m;
                while v >= m {
                    v -= m;
                }
                *e = v;
            }
            r
        } else {
            garner(&residues, self.modulus)
        }
    }
}

/// Exact product of two residue sequences modulo the prime `p`.
pub(crate) fn convolve_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let shorter = a.len().min(b.len());
    if shorter < SCHOOLBOOK_BELOW {
        return schoolbook(a, b, p);
    }
    let out_len = a.len() + b.len() - 1;
    let plan = Plan::new(out_len.next_power_of_two(), shorter, p);
    let mut r = plan.multiply(&plan.forward(a), &plan.forward(b));
    r.truncate(out_len);
    r
}

fn garner(residues: &[Vec<u64>], p: u64) -> Vec<u64> {
    let p1 = PRIMES[0].p;
    let p2 = PRIMES[1].p;
    let p3 = PRIMES[2].p;
    let inv_p1_mod_p2 = super::prime::pow_mod(p1 % p2, p2 - 2, p2);
    let p1p2_mod_p3 = mul_mod(p1 % p3, p2 % p3, p3);
    let inv_p1p2_mod_p3 = super::prime::pow_mod(p1p2_mod_p3, p3 - 2, p3);
    let p1_mod_p = p1 % p;
    let p1p2_mod_p = mul_mod(p1 % p, p2 % p, p);
    let len = residues[0].len();
    (0..len)
        .map(|i| {
            let r1 = residues[0][i];
            let r2 = residues[1][i];
            let v2 = mul_mod((r2 + p2 - r1 % p2) % p2, inv_p1_mod_p2, p2);
            let mut acc = (r1 % p + mul_mod(v2 % p, p1_mod_p, p)) % p;
            if residues.len() == 3 {
                let r3 = residues[2][i];
                let partial = (r1 % p3 + mul_mod(v2 % p3, p1 % p3, p3)) % p3;
                let v3 = mul_mod((r3 + p3 - partial) % p3, inv_p1p2_mod_p3, p3);
                acc = (acc + mul_mod(v3 % p, p1p2_mod_p, p)) % p;
            }
            acc
        })
        .collect()
}
