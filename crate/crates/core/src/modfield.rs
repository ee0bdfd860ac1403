//! Prime-field arithmetic for word-sized primes, NTT-based polynomial
//! multiplication and Chinese-remainder reconstruction.
//!
//! Residues are plain `u64` values kept in `[0, p)`. With `p < 2^32` every
//! product of two residues fits in a `u64`, so no wide multiplication is
//! needed on the hot paths.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An element of `Z_p`, canonical representative in `[0, p)`.
pub type Residue = u64;

/// NTT-friendly primes used for multi-prime runs, in selection order.
///
/// Every entry is `c * 2^k + 1` with `k >= 20` and lies below `2^31`.
pub const NTT_PRIMES: [u64; 10] = [
    998_244_353,   // 119 * 2^23 + 1
    1_004_535_809, // 479 * 2^21 + 1
    469_762_049,   // 7 * 2^26 + 1
    754_974_721,   // 45 * 2^24 + 1
    167_772_161,   // 5 * 2^25 + 1
    2_013_265_921, // 15 * 2^27 + 1
    1_811_939_329, // 27 * 2^26 + 1
    2_113_929_217, // 63 * 2^25 + 1
    1_045_430_273, // 997 * 2^20 + 1
    1_051_721_729, // 1003 * 2^20 + 1
];

/// Below this operand length products are formed by direct convolution.
const SCHOOLBOOK_CUTOFF: usize = 48;

struct Inner {
    p: u64,
    max_log2: u32,
    /// `roots[k]` is a primitive `2^k`-th root of unity.
    roots: Vec<u64>,
    inv_roots: Vec<u64>,
}

/// A prime modulus together with its precomputed roots of unity.
///
/// Cloning is cheap; all clones share the same tables.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.0.p)
            .field("max_log2", &self.0.max_log2)
            .finish()
    }
}

/// Builds the field context for `p`.
pub fn make_field(p: u64) -> Result<FieldCtx> {
    FieldCtx::new(p)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut f = 3u64;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

impl FieldCtx {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 32 {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let max_log2 = (p - 1).trailing_zeros();
        let mut roots = vec![1u64; max_log2 as usize + 1];
        if max_log2 > 0 {
            let factors = distinct_prime_factors(p - 1);
            let generator = (2..p)
                .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
                .unwrap_or(1);
            let top = pow_mod(generator, (p - 1) >> max_log2, p);
            roots[max_log2 as usize] = top;
            for k in (0..max_log2 as usize).rev() {
                roots[k] = roots[k + 1] * roots[k + 1] % p;
            }
        }
        let inv_roots = roots.iter().map(|&w| pow_mod(w, p - 2, p)).collect();
        Ok(FieldCtx(Arc::new(Inner {
            p,
            max_log2,
            roots,
            inv_roots,
        })))
    }

    /// Like [`FieldCtx::new`] but insists that transforms of length `2^log2_len`
    /// are available.
    pub fn with_ntt_capacity(p: u64, log2_len: u32) -> Result<Self> {
        let ctx = Self::new(p)?;
        if ctx.max_log2() < log2_len {
            return Err(Error::NoFFTSupport {
                needed: log2_len,
                available: ctx.max_log2(),
            });
        }
        Ok(ctx)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn max_log2(&self) -> u32 {
        self.0.max_log2
    }

    /// Primitive `2^k`-th root of unity, for `k <= max_log2`.
    pub fn root(&self, k: u32) -> u64 {
        self.0.roots[k as usize]
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0.p {
            s - self.0.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.0.p
    }

    pub fn pow(&self, base: u64, exp: u64) -> u64 {
        pow_mod(base, exp, self.0.p)
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.0.p;
        if a == 0 {
            None
        } else {
            Some(pow_mod(a, self.0.p - 2, self.0.p))
        }
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.0.p as i64) as u64
    }

    pub fn from_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.0.p as i128) as u64
    }

    pub fn from_bigint(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.0.p);
        v.mod_floor(&p).to_u64().unwrap_or(0)
    }

    /// Image of an exact rational; fails when the denominator vanishes mod p.
    pub fn from_rational(&self, v: &BigRational) -> Result<u64> {
        let den = self.from_bigint(v.denom());
        let den_inv = self.inv(den).ok_or_else(|| Error::UnsuitablePrime {
            p: self.p(),
            reason: format!("denominator of {v} vanishes"),
        })?;
        Ok(self.mul(self.from_bigint(v.numer()), den_inv))
    }

    /// Centered representative in `(-p/2, p/2]`.
    pub fn centered(&self, a: u64) -> i64 {
        if a > self.0.p / 2 {
            a as i64 - self.0.p as i64
        } else {
            a as i64
        }
    }

    /// Table of `1/k` for `k = 0..=n` (entry 0 is unused and set to 0).
    /// Requires `n < p`.
    pub fn inverses_up_to(&self, n: usize) -> Vec<u64> {
        let p = self.0.p;
        debug_assert!((n as u64) < p);
        let mut inv = vec![0u64; n + 1];
        if n >= 1 {
            inv[1] = 1;
        }
        for k in 2..=n {
            let k64 = k as u64;
            inv[k] = self.neg(inv[(p % k64) as usize] * (p / k64) % p);
        }
        inv
    }

    /// `1/k!` for `k = 0..=n`. Requires `n < p`.
    pub fn inverse_factorials(&self, n: usize) -> Vec<u64> {
        let inv = self.inverses_up_to(n);
        let mut out = vec![1u64; n + 1];
        for k in 1..=n {
            out[k] = self.mul(out[k - 1], inv[k]);
        }
        out
    }

    /// In-place cyclic NTT of a power-of-two length buffer.
    pub fn ntt(&self, a: &mut [u64], invert: bool) {
        let n = a.len();
        debug_assert!(n.is_power_of_two());
        let log_n = n.trailing_zeros();
        assert!(log_n <= self.0.max_log2, "transform length beyond field capacity");
        let p = self.0.p;

        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                a.swap(i, j);
            }
        }

        let table = if invert { &self.0.inv_roots } else { &self.0.roots };
        let mut twiddles = Vec::with_capacity(n / 2);
        let mut len = 2;
        let mut level = 1;
        while len <= n {
            let w_len = table[level];
            let half = len / 2;
            twiddles.clear();
            let mut w = 1u64;
            for _ in 0..half {
                twiddles.push(w);
                w = w * w_len % p;
            }
            for chunk in a.chunks_exact_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for k in 0..half {
                    let u = lo[k];
                    let v = hi[k] * twiddles[k] % p;
                    let s = u + v;
                    lo[k] = if s >= p { s - p } else { s };
                    hi[k] = if u >= v { u - v } else { u + p - v };
                }
            }
            len <<= 1;
            level += 1;
        }

        if invert {
            let n_inv = pow_mod(n as u64 % p, p - 2, p);
            for x in a.iter_mut() {
                *x = *x * n_inv % p;
            }
        }
    }
}

/// Direct convolution of `a` and `b`, truncated to `d` coefficients.
pub fn schoolbook_mul(ctx: &FieldCtx, a: &[u64], b: &[u64], d: usize) -> Vec<u64> {
    let p = ctx.p() as u128;
    let la = a.len().min(d);
    let lb = b.len().min(d);
    let mut out = vec![0u64; d];
    if la == 0 || lb == 0 {
        return out;
    }
    let top = (la + lb - 1).min(d);
    for (i, slot) in out.iter_mut().enumerate().take(top) {
        let lo = i.saturating_sub(lb - 1);
        let hi = i.min(la - 1);
        let mut acc: u128 = 0;
        for k in lo..=hi {
            acc += a[k] as u128 * b[i - k] as u128;
        }
        *slot = (acc % p) as u64;
    }
    out
}

/// Product via NTT; fails if the transform length exceeds the field's capacity.
pub fn ntt_mul(ctx: &FieldCtx, a: &[u64], b: &[u64], d: usize) -> Result<Vec<u64>> {
    let la = a.len().min(d);
    let lb = b.len().min(d);
    if la == 0 || lb == 0 {
        return Ok(vec![0; d]);
    }
    let full = la + lb - 1;
    let n = full.next_power_of_two();
    let log_n = n.trailing_zeros();
    if log_n > ctx.max_log2() {
        return Err(Error::NoFFTSupport {
            needed: log_n,
            available: ctx.max_log2(),
        });
    }
    let mut fa = vec![0u64; n];
    fa[..la].copy_from_slice(&a[..la]);
    let mut fb = vec![0u64; n];
    fb[..lb].copy_from_slice(&b[..lb]);
    ctx.ntt(&mut fa, false);
    ctx.ntt(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = ctx.mul(*x, *y);
    }
    ctx.ntt(&mut fa, true);
    fa.resize(d, 0);
    Ok(fa)
}

/// `a * b mod s^d`. Uses the NTT when the field supports the needed length and
/// falls back to direct convolution otherwise.
pub fn poly_mul(ctx: &FieldCtx, a: &[u64], b: &[u64], d: usize) -> Vec<u64> {
    let la = a.len().min(d);
    let lb = b.len().min(d);
    if la.min(lb) <= SCHOOLBOOK_CUTOFF {
        return schoolbook_mul(ctx, a, b, d);
    }
    match ntt_mul(ctx, a, b, d) {
        Ok(v) => v,
        Err(_) => schoolbook_mul(ctx, a, b, d),
    }
}

/// Unique `x` in `[0, prod p_i)` with `x = v_i mod p_i` for every pair.
pub fn crt_reconstruct(residues: &[(u64, u64)]) -> Result<BigInt> {
    let mut seen: Vec<u64> = Vec::with_capacity(residues.len());
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for &(value, prime) in residues {
        if seen.contains(&prime) {
            return Err(Error::DuplicatePrime(prime));
        }
        if prime < 2 {
            return Err(Error::Invalid(format!("modulus {prime} is below 2")));
        }
        seen.push(prime);
        let pb = BigInt::from(prime);
        let m_mod = modulus.mod_floor(&pb).to_u64().unwrap_or(0);
        let m_inv = mod_inverse_u64(m_mod, prime).ok_or_else(|| {
            Error::Invalid(format!("modulus {prime} is not coprime to the others"))
        })?;
        let x_mod = x.mod_floor(&pb).to_u64().unwrap_or(0);
        let diff = (value % prime + prime - x_mod) % prime;
        let k = (diff as u128 * m_inv as u128 % prime as u128) as u64;
        x += &modulus * BigInt::from(k);
        modulus *= pb;
    }
    Ok(x)
}

/// Centered variant of [`crt_reconstruct`], in `(-M/2, M/2]`.
pub fn crt_reconstruct_centered(residues: &[(u64, u64)]) -> Result<BigInt> {
    let x = crt_reconstruct(residues)?;
    let modulus: BigInt = residues.iter().map(|&(_, p)| BigInt::from(p)).product();
    if &x * 2 > modulus {
        Ok(x - modulus)
    } else {
        Ok(x)
    }
}

fn mod_inverse_u64(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Rational reconstruction modulo an arbitrary modulus `m`.
///
/// Returns `(num, den)` with `|num|, den <= floor(sqrt(m/2))`, `den > 0`,
/// `gcd(num, den) = 1` and `den * r = num (mod m)`, or `None` when no such
/// pair exists.
pub fn rational_reconstruct_big(r: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (num, den) = if t1.sign() == Sign::Minus {
        (-r1, -t1)
    } else {
        (r1, t1)
    };
    if !num.gcd(&den).is_one() {
        return None;
    }
    Some((num, den))
}

/// Rational reconstruction of a single residue modulo the field prime.
pub fn rational_reconstruct(r: Residue, ctx: &FieldCtx) -> Option<(i64, u64)> {
    let (n, d) = rational_reconstruct_big(&BigInt::from(r), &BigInt::from(ctx.p()))?;
    Some((n.to_i64()?, d.to_u64()?))
}

/// Exact rational from residues over several primes: CRT followed by rational
/// reconstruction modulo the product of the primes.
pub fn crt_rational(residues: &[(u64, u64)]) -> Result<Option<BigRational>> {
    let x = crt_reconstruct(residues)?;
    let modulus: BigInt = residues.iter().map(|&(_, p)| BigInt::from(p)).product();
    Ok(rational_reconstruct_big(&x, &modulus).map(|(n, d)| BigRational::new(n, d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_field_examples() {
        assert_eq!(make_field(998_244_353).unwrap().max_log2(), 23);
        assert_eq!(make_field(7).unwrap().max_log2(), 1);
        assert_eq!(make_field(6).unwrap_err(), Error::NotPrime(6));
        assert!(matches!(
            FieldCtx::with_ntt_capacity(7, 3),
            Err(Error::NoFFTSupport { needed: 3, available: 1 })
        ));
        assert!(matches!(make_field(1 << 40), Err(Error::ModulusTooLarge(_))));
    }

    #[test]
    fn built_in_primes_have_roots() {
        for &p in &NTT_PRIMES {
            let ctx = make_field(p).unwrap();
            assert!(ctx.max_log2() >= 20);
            for k in 1..=ctx.max_log2() {
                let w = ctx.root(k);
                assert_eq!(ctx.pow(w, 1 << k), 1);
                assert_eq!(ctx.pow(w, 1 << (k - 1)), p - 1);
            }
        }
    }

    #[test]
    fn ntt_round_trip() {
        let ctx = make_field(998_244_353).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for log_n in 0..=12 {
            let n = 1usize << log_n;
            let orig: Vec<u64> = (0..n).map(|_| rng.gen_range(0..ctx.p())).collect();
            let mut a = orig.clone();
            ctx.ntt(&mut a, false);
            ctx.ntt(&mut a, true);
            assert_eq!(a, orig);
        }
    }

    #[test]
    fn poly_mul_examples() {
        let ctx = make_field(998_244_353).unwrap();
        let one_minus = vec![1, ctx.neg(1)];
        assert_eq!(
            poly_mul(&ctx, &[1, 1], &one_minus, 4),
            vec![1, 0, ctx.neg(1), 0]
        );
        assert_eq!(poly_mul(&ctx, &[0], &[5, 6, 7], 3), vec![0, 0, 0]);
    }

    #[test]
    fn poly_mul_matches_schoolbook() {
        let ctx = make_field(998_244_353).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &len in &[16usize, 128, 1024] {
            for _ in 0..200 {
                let a: Vec<u64> = (0..len).map(|_| rng.gen_range(0..ctx.p())).collect();
                let b: Vec<u64> = (0..len).map(|_| rng.gen_range(0..ctx.p())).collect();
                let d = 2 * len - 1;
                assert_eq!(
                    ntt_mul(&ctx, &a, &b, d).unwrap(),
                    schoolbook_mul(&ctx, &a, &b, d)
                );
            }
        }
    }

    #[test]
    fn poly_mul_falls_back_without_roots() {
        // 1_000_003 - 1 = 2 * 500_001
        let ctx = make_field(1_000_003).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<u64> = (0..300).map(|_| rng.gen_range(0..ctx.p())).collect();
        let b: Vec<u64> = (0..300).map(|_| rng.gen_range(0..ctx.p())).collect();
        assert!(ntt_mul(&ctx, &a, &b, 599).is_err());
        assert_eq!(poly_mul(&ctx, &a, &b, 599), schoolbook_mul(&ctx, &a, &b, 599));
    }

    #[test]
    fn crt_examples() {
        // exhaustive search over 0..15 for x = 2 mod 3, x = 3 mod 5
        let brute = (0..15u64).find(|x| x % 3 == 2 && x % 5 == 3).unwrap();
        assert_eq!(brute, 8);
        assert_eq!(crt_reconstruct(&[(2, 3), (3, 5)]).unwrap(), BigInt::from(8));
        assert_eq!(crt_reconstruct(&[(0, 998_244_353)]).unwrap(), BigInt::zero());
        assert_eq!(
            crt_reconstruct(&[(1, 3), (1, 5), (1, 7)]).unwrap(),
            BigInt::one()
        );
        assert_eq!(
            crt_reconstruct(&[(1, 3), (2, 3)]).unwrap_err(),
            Error::DuplicatePrime(3)
        );
        assert_eq!(
            crt_reconstruct_centered(&[(4, 5), (6, 7)]).unwrap(),
            BigInt::from(-1)
        );
    }

    #[test]
    fn crt_recovers_random_values() {
        let primes = [NTT_PRIMES[0], NTT_PRIMES[1], NTT_PRIMES[2]];
        let modulus: BigInt = primes.iter().map(|&p| BigInt::from(p)).product();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let hi: u64 = rng.gen();
            let lo: u64 = rng.gen();
            let x = ((BigInt::from(hi) << 64usize) + BigInt::from(lo)).mod_floor(&modulus);
            let res: Vec<(u64, u64)> = primes
                .iter()
                .map(|&p| ((&x % BigInt::from(p)).to_u64().unwrap(), p))
                .collect();
            assert_eq!(crt_reconstruct(&res).unwrap(), x);
        }
    }

    fn extended_euclid_inverse(a: u64, m: u64) -> u64 {
        mod_inverse_u64(a, m).unwrap()
    }

    #[test]
    fn rational_reconstruct_examples() {
        let ctx = make_field(998_244_353).unwrap();
        let inv12 = extended_euclid_inverse(12, ctx.p());
        assert_eq!(ctx.mul(inv12, 12), 1);
        assert_eq!(rational_reconstruct(inv12, &ctx), Some((1, 12)));
        assert_eq!(rational_reconstruct(5, &ctx), Some((5, 1)));
        assert_eq!(rational_reconstruct(ctx.neg(3), &ctx), Some((-3, 1)));
    }

    #[test]
    fn rational_reconstruct_none_when_no_small_pair() {
        // A small prime keeps the search oracle exhaustive: for p = 10007 the
        // bound is floor(sqrt(p/2)) = 70.
        let ctx = make_field(10_007).unwrap();
        let bound = 70i64;
        let p = ctx.p() as i64;
        let mut found_none = 0;
        for r in (p / 2)..(p / 2 + 400) {
            let r = r as u64;
            let oracle = (1..=bound).find_map(|den| {
                let num = ctx.centered(ctx.mul(r, den as u64));
                (num.abs() <= bound && num_integer::gcd(num, den) == 1).then_some((num, den as u64))
            });
            let got = rational_reconstruct(r, &ctx);
            match oracle {
                None => {
                    found_none += 1;
                    assert_eq!(got, None, "r = {r}");
                }
                Some(_) => {
                    let (n, d) = got.expect("oracle found a pair");
                    assert_eq!(ctx.mul(r, d), ctx.from_i64(n));
                    assert!(n.abs() <= bound && d as i64 <= bound);
                }
            }
        }
        assert!(found_none > 0);
    }
}
