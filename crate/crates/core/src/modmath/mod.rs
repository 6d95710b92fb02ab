//! Prime-field scalars, prime discovery and dense polynomials over `F_p`.

mod ntt;
pub(crate) use ntt::{Plan, Spectrum};
mod prime;

pub use prime::{factorize, find_prime_in_interval, find_primitive_root, is_prime};
pub(crate) use prime::mul_mod;

use crate::error::{Error, Result};
use serde::Serialize;

/// The prime field `F_p` for a prime `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 63 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    #[inline]
    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        s.min(s.wrapping_sub(self.p))
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let d = a.wrapping_sub(b);
        d.min(d.wrapping_add(self.p))
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.p <= 1 << 32 {
            a * b % self.p
        } else {
            mul_mod(a, b, self.p)
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        (a != 0).then(|| self.pow(a, self.p - 2))
    }

    /// `[0, 1^{-1}, 2^{-1}, ..., n^{-1}]` in one linear pass; requires `n < p`.
    pub fn inverses_up_to(&self, n: usize) -> Vec<u64> {
        assert!((n as u64) < self.p, "inverse of {n} does not exist mod {}", self.p);
        let mut inv = vec![0u64; n + 1];
        if n >= 1 {
            inv[1] = 1;
        }
        for i in 2..=n {
            let q = self.p / i as u64;
            let r = (self.p % i as u64) as usize;
            inv[i] = self.mul(self.p - q, inv[r]);
        }
        inv
    }
}

/// Dense polynomial over a prime field; `coeffs[i]` is the coefficient of `x^i`.
///
/// Trailing zeros are allowed; the all-zero (or empty) sequence is the zero
/// polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPoly {
    field: PrimeField,
    coeffs: Vec<u64>,
}

impl ModPoly {
    /// Builds a polynomial, reducing every coefficient into `[0, p)`.
    pub fn new(field: PrimeField, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c = field.reduce(*c);
        }
        ModPoly { field, coeffs }
    }

    pub fn from_signed(field: PrimeField, coeffs: &[i64]) -> Self {
        ModPoly {
            field,
            coeffs: coeffs.iter().map(|&c| field.from_i64(c)).collect(),
        }
    }

    pub fn zero(field: PrimeField) -> Self {
        ModPoly {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: PrimeField) -> Self {
        ModPoly::new(field, vec![1])
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    /// Coefficient of `x^i` (zero past the stored length).
    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Logical degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// Drops trailing zero coefficients.
    pub fn normalize(&mut self) {
        let len = self.degree().map_or(0, |d| d + 1);
        self.coeffs.truncate(len);
    }

    pub fn truncated(mut self, len: usize) -> Self {
        self.coeffs.truncate(len);
        self
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = self.field.reduce(x);
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.field.add(self.field.mul(acc, x), c))
    }

    /// Equality as polynomials, ignoring trailing zeros.
    pub fn same_as(&self, other: &ModPoly) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        self.field == other.field && (0..n).all(|i| self.coeff(i) == other.coeff(i))
    }
}

fn same_field(f: &ModPoly, g: &ModPoly) -> Result<PrimeField> {
    if f.field != g.field {
        return Err(Error::FieldMismatch(f.field.p, g.field.p));
    }
    Ok(f.field)
}

/// Raw product of residue slices in `field`, full length.
pub(crate) fn mul_slices(field: PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    ntt::convolve_mod(a, b, field.modulus())
}

/// Exact product `f * g` over `F_p`, truncated to degree `< trunc` when given.
pub fn poly_mul_mod(f: &ModPoly, g: &ModPoly, trunc: Option<usize>) -> Result<ModPoly> {
    let field = same_field(f, g)?;
    let limit = trunc.unwrap_or(usize::MAX);
    let a = &f.coeffs[..f.coeffs.len().min(limit)];
    let b = &g.coeffs[..g.coeffs.len().min(limit)];
    let mut out = mul_slices(field, a, b);
    out.truncate(limit);
    Ok(ModPoly { field, coeffs: out })
}

/// Synthetic division by `x - root`: returns `(quotient, f(root))`.
pub fn poly_divrem_linear(f: &ModPoly, root: u64) -> (ModPoly, u64) {
    let field = f.field;
    let root = field.reduce(root);
    let len = f.degree().map_or(0, |d| d + 1);
    if len == 0 {
        return (ModPoly::zero(field), 0);
    }
    let mut quotient = vec![0u64; len - 1];
    let mut carry = 0u64;
    for i in (0..len).rev() {
        carry = field.add(field.mul(carry, root), f.coeffs[i]);
        if i > 0 {
            quotient[i - 1] = carry;
        }
    }
    (ModPoly::new(field, quotient), carry)
}

/// Polynomial division with remainder, `f = q * g + r` with `deg r < deg g`.
///
/// Uses reversal and a power-series inverse, so the cost is a constant number
/// of multiplications of size `deg f`.
pub fn poly_divrem(f: &ModPoly, g: &ModPoly) -> Result<(ModPoly, ModPoly)> {
    let field = same_field(f, g)?;
    let dg = g
        .degree()
        .ok_or_else(|| Error::precondition("division by the zero polynomial"))?;
    let df = match f.degree() {
        Some(d) if d >= dg => d,
        _ => return Ok((ModPoly::zero(field), f.clone())),
    };
    let qlen = df - dg + 1;
    let rev_f: Vec<u64> = f.coeffs[..=df].iter().rev().take(qlen).copied().collect();
    let rev_g: Vec<u64> = g.coeffs[..=dg].iter().rev().copied().collect();
    let rev_g = ModPoly::new(field, rev_g);
    let inv = crate::series::series_inverse(&rev_g, qlen - 1)?;
    let mut q = mul_slices(field, &rev_f, inv.coeffs());
    q.truncate(qlen);
    q.resize(qlen, 0);
    q.reverse();
    let q = ModPoly::new(field, q);
    let qg = mul_slices(field, q.coeffs(), &g.coeffs[..=dg]);
    let r: Vec<u64> = (0..dg)
        .map(|i| field.sub(f.coeff(i), qg.get(i).copied().unwrap_or(0)))
        .collect();
    let mut r = ModPoly::new(field, r);
    r.normalize();
    Ok((q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn naive_mul(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
        if f.is_empty() || g.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u128; f.len() + g.len() - 1];
        for (i, &a) in f.iter().enumerate() {
            for (j, &b) in g.iter().enumerate() {
                out[i + j] = (out[i + j] + a as u128 * b as u128) % p as u128;
            }
        }
        out.into_iter().map(|x| x as u64).collect()
    }

    #[test]
    fn rejects_composite_and_huge_moduli() {
        assert_eq!(PrimeField::new(1), Err(Error::NotPrime(1)));
        assert_eq!(PrimeField::new(91), Err(Error::NotPrime(91)));
        assert!(PrimeField::new(18_446_744_073_709_551_557).is_err());
        assert!(PrimeField::new(9_223_372_036_854_775_783).is_ok());
    }

    #[test]
    fn batched_inverses() {
        let f = field(101);
        let inv = f.inverses_up_to(100);
        for i in 1..=100u64 {
            assert_eq!(f.mul(i, inv[i as usize]), 1);
        }
        let big = field(1_000_000_007);
        let inv = big.inverses_up_to(1000);
        for i in 1..=1000u64 {
            assert_eq!(big.mul(i, inv[i as usize]), 1);
        }
    }

    #[test]
    fn mul_examples() {
        let f5 = field(5);
        let a = ModPoly::new(f5, vec![1, 1]);
        let sq = poly_mul_mod(&a, &a, None).unwrap();
        assert_eq!(sq.coeffs(), &[1, 2, 1]);

        let f7 = field(7);
        let x = ModPoly::new(f7, vec![1, 2, 1]);
        let y = ModPoly::new(f7, vec![1, 0, 1]);
        let prod = poly_mul_mod(&x, &y, None).unwrap();
        assert_eq!(prod.coeffs(), &[1, 2, 2, 2, 1]);

        let one = ModPoly::one(f7);
        assert!(poly_mul_mod(&x, &one, None).unwrap().same_as(&x));
        assert_eq!(poly_mul_mod(&x, &y, Some(3)).unwrap().coeffs(), &[1, 2, 2]);
    }

    #[test]
    fn mul_field_mismatch() {
        let a = ModPoly::one(field(5));
        let b = ModPoly::one(field(7));
        assert_eq!(poly_mul_mod(&a, &b, None), Err(Error::FieldMismatch(5, 7)));
    }

    #[test]
    fn divrem_linear_examples() {
        let f7 = field(7);
        let f = ModPoly::from_signed(f7, &[-1, 0, 1]);
        let (q, r) = poly_divrem_linear(&f, 1);
        assert_eq!((q.coeffs(), r), (&[1u64, 1][..], 0));

        let mu = 3;
        let f = ModPoly::from_signed(f7, &[-mu, 1]);
        let (q, r) = poly_divrem_linear(&f, mu as u64);
        assert_eq!((q.coeffs(), r), (&[1u64][..], 0));

        let f5 = field(5);
        let f = ModPoly::new(f5, vec![1, 0, 1]);
        let (q, r) = poly_divrem_linear(&f, 2);
        assert_eq!((q.coeffs(), r), (&[2u64, 1][..], 0));
    }

    #[test]
    fn divrem_general_reconstructs() {
        let f = field(97);
        let a = ModPoly::new(f, (1..=40).map(|i| i * i + 3).collect());
        let b = ModPoly::new(f, vec![5, 0, 7, 1, 9]);
        let (q, r) = poly_divrem(&a, &b).unwrap();
        assert!(r.degree().map_or(true, |d| d < 4));
        let back = poly_mul_mod(&q, &b, None).unwrap();
        let sum: Vec<u64> = (0..40).map(|i| f.add(back.coeff(i), r.coeff(i))).collect();
        assert!(ModPoly::new(f, sum).same_as(&a));
    }

    proptest! {
        #[test]
        fn mul_matches_schoolbook(
            lo in 2u64..(1u64 << 31),
            f in prop::collection::vec(any::<u64>(), 0..=257),
            g in prop::collection::vec(any::<u64>(), 0..=257),
        ) {
            let p = find_prime_in_interval(lo);
            let fl = field(p);
            let fp = ModPoly::new(fl, f);
            let gp = ModPoly::new(fl, g);
            let prod = poly_mul_mod(&fp, &gp, None).unwrap();
            prop_assert_eq!(prod.coeffs(), &naive_mul(fp.coeffs(), gp.coeffs(), p)[..]);
        }

        #[test]
        fn divrem_linear_reconstruction(
            f in prop::collection::vec(0u64..1_000_003, 0..60),
            root in 0u64..1_000_003,
        ) {
            let fl = field(1_000_003);
            let fp = ModPoly::new(fl, f);
            let (q, r) = poly_divrem_linear(&fp, root);
            prop_assert_eq!(r, fp.eval(root));
            let lin = ModPoly::new(fl, vec![fl.neg(root), 1]);
            let mut back = poly_mul_mod(&q, &lin, None).unwrap().into_coeffs();
            if back.is_empty() { back.push(0); }
            back[0] = fl.add(back[0], r);
            prop_assert!(ModPoly::new(fl, back).same_as(&fp));
        }
    }
}
