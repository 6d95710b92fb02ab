//! Truncated power series over `F_p`: logarithm of structured products,
//! exponential, inverse, and the Newton-identity recurrence.
//!
//! `series_exp` and `newton_e_from_p` share one engine. Both are instances of
//! the relaxed recurrence
//!
//! ```text
//! y_0 = init,   y_i = i^{-1} * sum_{j < i} c_{i-j} * y_j
//! ```
//!
//! solved by divide and conquer: finish the left half, push its contribution
//! into the right half with one convolution, recurse on the right half. The
//! exponential uses `c_k = k f_k` (from `g' = f' g`), the Newton identities use
//! `c_k = (-1)^{k-1} P_k`.

use crate::error::{Error, Result};
use crate::modmath::{mul_slices, ModPoly, Plan, PrimeField, Spectrum};

/// Coefficient ring of the relaxed recurrence, stored as fixed-size blocks of
/// residues. The scalar case has blocks of length one; the multivariate
/// exponential uses blocks holding a truncated polynomial in the remaining
/// variables.
pub(crate) trait BlockConvolution {
    fn field(&self) -> PrimeField;
    fn block(&self) -> usize;
    /// Subproblems with at most this many indices are finished naively.
    fn leaf(&self) -> usize;
    /// First `keep` blocks of the product of two block sequences.
    fn convolve(&self, a: &[u64], b: &[u64], keep: usize) -> Vec<u64>;
    /// `acc += x * y` for single blocks.
    fn mul_add(&self, acc: &mut [u64], x: &[u64], y: &[u64]);
}

#[cfg(test)]
struct Scalar(PrimeField);

#[cfg(test)]
impl BlockConvolution for Scalar {
    fn field(&self) -> PrimeField {
        self.0
    }

    fn block(&self) -> usize {
        1
    }

    fn leaf(&self) -> usize {
        96
    }

    fn convolve(&self, a: &[u64], b: &[u64], keep: usize) -> Vec<u64> {
        let b = &b[..b.len().min(keep)];
        let mut out = mul_slices(self.0, a, b);
        out.truncate(keep);
        out
    }

    fn mul_add(&self, acc: &mut [u64], x: &[u64], y: &[u64]) {
        acc[0] = self.0.add(acc[0], self.0.mul(x[0], y[0]));
    }
}

/// Solves the relaxed recurrence for `len` blocks. `kernel` holds at least
/// `len` blocks (block 0 is ignored) and `init` is block `y_0`.
pub(crate) fn solve_relaxed<C: BlockConvolution>(
    ring: &C,
    kernel: &[u64],
    init: &[u64],
    len: usize,
) -> Vec<u64> {
    let w = ring.block();
    assert_eq!(init.len(), w);
    assert!(kernel.len() >= len * w);
    let mut y = vec![0u64; len * w];
    if len == 0 {
        return y;
    }
    y[..w].copy_from_slice(init);
    let inv = ring.field().inverses_up_to(len - 1);
    let mut solver = Relaxed {
        ring,
        kernel,
        inv: &inv,
        y: &mut y,
    };
    solver.run(0, len - 1);
    y
}

struct Relaxed<'a, C> {
    ring: &'a C,
    kernel: &'a [u64],
    inv: &'a [u64],
    y: &'a mut [u64],
}

impl<C: BlockConvolution> Relaxed<'_, C> {
    fn finalize(&mut self, i: usize) {
        if i == 0 {
            return;
        }
        let w = self.ring.block();
        let field = self.ring.field();
        let s = self.inv[i];
        for v in &mut self.y[i * w..(i + 1) * w] {
            *v = field.mul(*v, s);
        }
    }

    fn run(&mut self, lo: usize, hi: usize) {
        let w = self.ring.block();
        if hi - lo < self.ring.leaf() {
            for i in lo..=hi {
                self.finalize(i);
                for target in i + 1..=hi {
                    let (head, tail) = self.y.split_at_mut(target * w);
                    let yi = &head[i * w..(i + 1) * w];
                    let gap = target - i;
                    let k = &self.kernel[gap * w..(gap + 1) * w];
                    self.ring.mul_add(&mut tail[..w], k, yi);
                }
            }
            return;
        }
        let mid = (lo + hi) / 2;
        self.run(lo, mid);
        let span = hi - lo + 1;
        let left = &self.y[lo * w..(mid + 1) * w];
        let kern = &self.kernel[..span * w];
        let contrib = self.ring.convolve(left, kern, span);
        let field = self.ring.field();
        for i in mid + 1..=hi {
            let off = (i - lo) * w;
            for (dst, &c) in self.y[i * w..(i + 1) * w].iter_mut().zip(&contrib[off..off + w]) {
                *dst = field.add(*dst, c);
            }
        }
        self.run(mid + 1, hi);
    }
}

const SCALAR_LEAF: usize = 128;

/// Scalar specialization of [`solve_relaxed`]. The index range is padded to
/// `SCALAR_LEAF * 2^k` so every node on a level has the same span; the kernel
/// transform is then computed once per level, and the left-half contribution
/// is a cyclic middle product of length `span`.
pub(crate) fn solve_relaxed_scalar(field: PrimeField, kernel: &[u64], init: u64, len: usize) -> Vec<u64> {
    if len == 0 {
        return Vec::new();
    }
    let mut padded = SCALAR_LEAF;
    while padded < len {
        padded *= 2;
    }
    let mut k = vec![0u64; padded];
    let kl = kernel.len().min(len);
    k[..kl].copy_from_slice(&kernel[..kl]);
    let mut solver = ScalarRelaxed {
        field,
        kernel: k,
        inv: field.inverses_up_to(len - 1),
        y: vec![0u64; padded],
        len,
        levels: Vec::new(),
    };
    solver.y[0] = init;
    solver.run(0, padded);
    solver.y.truncate(len);
    solver.y
}

struct ScalarRelaxed {
    field: PrimeField,
    kernel: Vec<u64>,
    inv: Vec<u64>,
    y: Vec<u64>,
    len: usize,
    levels: Vec<(usize, Plan, Spectrum)>,
}

impl ScalarRelaxed {
    fn leaf(&mut self, lo: usize, span: usize) {
        let p = self.field.modulus();
        let hi = (lo + span).min(self.len);
        for i in lo..hi {
            let mut acc = self.y[i] as u128;
            if p <= 1 << 32 {
                for j in lo..i {
                    acc += (self.kernel[i - j] * self.y[j]) as u128;
                }
            } else {
                for j in lo..i {
                    let prod = self.kernel[i - j] as u128 * self.y[j] as u128;
                    acc = (acc + prod) % p as u128;
                }
            }
            let raw = (acc % p as u128) as u64;
            self.y[i] = if i == 0 { raw } else { self.field.mul(raw, self.inv[i]) };
        }
    }

    /// Contribution of `y[lo..lo+half]` to the next `count` entries only.
    fn push_naive(&mut self, lo: usize, half: usize, count: usize) {
        let field = self.field;
        for i in lo + half..lo + half + count {
            let mut acc = self.y[i];
            for j in lo..lo + half {
                acc = field.add(acc, field.mul(self.kernel[i - j], self.y[j]));
            }
            self.y[i] = acc;
        }
    }

    fn kernel_spectrum(&mut self, span: usize) -> usize {
        if let Some(pos) = self.levels.iter().position(|(s, _, _)| *s == span) {
            return pos;
        }
        let plan = Plan::new(span, span / 2, self.field.modulus());
        let spec = plan.forward(&self.kernel[..span]);
        self.levels.push((span, plan, spec));
        self.levels.len() - 1
    }

    fn run(&mut self, lo: usize, span: usize) {
        if lo >= self.len {
            return;
        }
        if span <= SCALAR_LEAF {
            self.leaf(lo, span);
            return;
        }
        let half = span / 2;
        self.run(lo, half);
        if lo + half >= self.len {
            return;
        }
        let remaining = (self.len - lo - half).min(half);
        if remaining <= 16 {
            self.push_naive(lo, half, remaining);
            self.run(lo + half, half);
            return;
        }
        let level = self.kernel_spectrum(span);
        let (_, plan, kspec) = &self.levels[level];
        let left = plan.forward(&self.y[lo..lo + half]);
        // wrapped terms land below `half`, so the upper half is exact
        let out = plan.multiply(&left, kspec);
        debug_assert_eq!(plan.size(), span);
        let field = self.field;
        for (dst, &c) in self.y[lo + half..lo + span].iter_mut().zip(&out[half..]) {
            *dst = field.add(*dst, c);
        }
        self.run(lo + half, half);
    }
}

/// Sign in a factor `1 ± W^b x^{a_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSign {
    Plus,
    Minus,
}

/// The product `prod_i (1 ± W^b x^{a_i})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpec {
    pub exponents: Vec<u64>,
    pub scale_base: i64,
    pub scale_exp: u64,
    pub sign: FactorSign,
}

impl ProductSpec {
    /// `prod_i (1 + x^{a_i})`.
    pub fn plain(exponents: Vec<u64>) -> Self {
        ProductSpec {
            exponents,
            scale_base: 1,
            scale_exp: 0,
            sign: FactorSign::Plus,
        }
    }

    /// Schoolbook expansion modulo `x^{t+1}`; used as a reference in tests.
    pub fn expand_naive(&self, t: usize, field: PrimeField) -> ModPoly {
        let c = field.pow(field.from_i64(self.scale_base), self.scale_exp);
        let c = match self.sign {
            FactorSign::Plus => c,
            FactorSign::Minus => field.neg(c),
        };
        let mut acc = vec![0u64; t + 1];
        acc[0] = 1;
        for &a in &self.exponents {
            let a = a as usize;
            if a > t {
                continue;
            }
            // descending order keeps acc[r - a] un-updated; a = 0 scales by 1 + c
            for r in (a..=t).rev() {
                acc[r] = field.add(acc[r], field.mul(c, acc[r - a]));
            }
        }
        ModPoly::new(field, acc)
    }
}

/// Coefficients of `ln prod_i (1 ± W^b x^{a_i})` up to `x^t`.
///
/// Entries are grouped by exponent (`|S_k|` occurrences of exponent `k`) so the
/// work is `O(n + t log t)` field operations. All exponents must be positive;
/// factors with `a_i > t` contribute nothing below degree `t + 1`.
pub fn log_product_coeffs(spec: &ProductSpec, t: usize, field: PrimeField) -> Result<ModPoly> {
    if (t as u64) >= field.modulus() {
        return Err(Error::precondition(format!(
            "log_product_coeffs needs p > t (p = {}, t = {t})",
            field.modulus()
        )));
    }
    if spec.exponents.contains(&0) {
        return Err(Error::precondition(
            "zero exponent gives a constant factor with no logarithm",
        ));
    }
    let mut multiplicity = vec![0u64; t + 1];
    for &a in &spec.exponents {
        if a as usize <= t {
            multiplicity[a as usize] += 1;
        }
    }
    let inv = field.inverses_up_to(t);
    let scale = field.pow(field.from_i64(spec.scale_base), spec.scale_exp);
    let mut out = vec![0u64; t + 1];
    for (k, &count) in multiplicity.iter().enumerate().skip(1) {
        if count == 0 {
            continue;
        }
        let count = field.reduce(count);
        let mut power = scale;
        for j in 1..=t / k {
            // ln(1 + u) = sum (-1)^{j-1} u^j / j,   ln(1 - u) = -sum u^j / j
            let term = field.mul(field.mul(count, power), inv[j]);
            let negative = match spec.sign {
                FactorSign::Plus => j % 2 == 0,
                FactorSign::Minus => true,
            };
            out[j * k] = if negative {
                field.sub(out[j * k], term)
            } else {
                field.add(out[j * k], term)
            };
            power = field.mul(power, scale);
        }
    }
    Ok(ModPoly::new(field, out))
}

fn check_exp_input(f: &ModPoly, t: usize) -> Result<PrimeField> {
    let field = f.field();
    if f.coeff(0) != 0 {
        return Err(Error::precondition("series_exp needs a zero constant term"));
    }
    if (t as u64) >= field.modulus() {
        return Err(Error::precondition(format!(
            "series_exp needs p > t (p = {}, t = {t})",
            field.modulus()
        )));
    }
    Ok(field)
}

/// Below this length `series_exp` runs the relaxed recurrence directly.
const NEWTON_EXP_BELOW: usize = 512;

/// `exp(f) mod x^{t+1}` for `f` with zero constant term.
///
/// Short series use the relaxed recurrence `i g_i = sum_k k f_k g_{i-k}`.
/// Longer ones start from that and double the precision with Newton steps
/// `g <- g (1 + f - ln g)`, carrying `1/g` along so each step costs a constant
/// number of multiplications.
pub fn series_exp(f: &ModPoly, t: usize) -> Result<ModPoly> {
    let field = check_exp_input(f, t)?;
    let n = t + 1;
    if n <= NEWTON_EXP_BELOW {
        return series_exp_relaxed(f, t);
    }
    // precisions n, ceil(n/2), ... down to the relaxed base case
    let mut steps = vec![n];
    while *steps.last().unwrap() > NEWTON_EXP_BELOW {
        let last = *steps.last().unwrap();
        steps.push(last.div_ceil(2));
    }
    steps.reverse();
    let inv = field.inverses_up_to(t);
    let fc = f.coeffs();
    let mut g = series_exp_relaxed(f, steps[0] - 1)?.into_coeffs();
    g.resize(steps[0], 0);
    let mut h = series_inverse(&ModPoly::new(field, g.clone()), steps[0] - 1)?.into_coeffs();
    for &len in &steps[1..] {
        // h is 1/g only up to the previous precision; two Newton steps bring
        // it to 1/g mod x^len for the current g
        h = inverse_step(field, &g, &h, g.len());
        h = inverse_step(field, &g, &h, len);
        // ln g = integral of g'/g
        let dg: Vec<u64> = (1..g.len())
            .map(|k| field.mul(field.reduce(k as u64), g[k]))
            .collect();
        let mut q = mul_slices(field, &dg, &h[..len - 1]);
        q.resize(len - 1, 0);
        let mut e = vec![0u64; len];
        e[0] = 1;
        for k in 1..len {
            let lng = field.mul(q[k - 1], inv[k]);
            e[k] = field.sub(fc.get(k).copied().unwrap_or(0), lng);
        }
        let mut next = mul_slices(field, &g, &e);
        next.resize(len, 0);
        g = next;
    }
    Ok(ModPoly::new(field, g))
}

/// One Newton step `h <- h (2 - g h) mod x^len` towards `1/g`.
fn inverse_step(field: PrimeField, g: &[u64], h: &[u64], len: usize) -> Vec<u64> {
    let mut gh = mul_slices(field, &g[..g.len().min(len)], h);
    gh.resize(len, 0);
    for v in gh.iter_mut() {
        *v = field.neg(*v);
    }
    gh[0] = field.add(gh[0], 2);
    let mut next = mul_slices(field, h, &gh);
    next.resize(len, 0);
    next
}

/// `exp(f) mod x^{t+1}` through the relaxed recurrence only.
pub(crate) fn series_exp_relaxed(f: &ModPoly, t: usize) -> Result<ModPoly> {
    let field = check_exp_input(f, t)?;
    let kernel: Vec<u64> = (0..=t)
        .map(|k| field.mul(field.reduce(k as u64), f.coeff(k)))
        .collect();
    let g = solve_relaxed_scalar(field, &kernel, 1, t + 1);
    Ok(ModPoly::new(field, g))
}

/// `g` with `f g ≡ 1 mod x^{t+1}` by Newton iteration.
pub fn series_inverse(f: &ModPoly, t: usize) -> Result<ModPoly> {
    let field = f.field();
    let f0 = field
        .inv(f.coeff(0))
        .ok_or_else(|| Error::precondition("series_inverse needs an invertible constant term"))?;
    let target = t + 1;
    let mut g = vec![f0];
    while g.len() < target {
        let len = (2 * g.len()).min(target);
        let head = &f.coeffs()[..f.coeffs().len().min(len)];
        let mut fg = mul_slices(field, head, &g);
        fg.truncate(len);
        // 2 - f g
        for v in fg.iter_mut() {
            *v = field.neg(*v);
        }
        fg[0] = field.add(fg[0], 2);
        let mut next = mul_slices(field, &g, &fg);
        next.truncate(len);
        next.resize(len, 0);
        g = next;
    }
    g.truncate(target);
    Ok(ModPoly::new(field, g))
}

/// Elementary symmetric values `E_1..E_m` from power sums `P_1..P_m` through
/// `j E_j = sum_{i=1}^{j} (-1)^{i-1} E_{j-i} P_i`.
pub fn newton_e_from_p(power_sums: &[u64], field: PrimeField) -> Result<Vec<u64>> {
    let m = power_sums.len();
    if (m as u64) >= field.modulus() {
        return Err(Error::precondition(format!(
            "newton_e_from_p needs p > m (p = {}, m = {m})",
            field.modulus()
        )));
    }
    let mut kernel = vec![0u64; m + 1];
    for (k, &p) in power_sums.iter().enumerate() {
        let p = field.reduce(p);
        kernel[k + 1] = if k % 2 == 0 { p } else { field.neg(p) };
    }
    let mut e = solve_relaxed_scalar(field, &kernel, 1, m + 1);
    e.remove(0);
    Ok(e)
}
