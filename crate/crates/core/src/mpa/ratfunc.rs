//! Rational functions in `t` over `Z_p`, assembled from simple terms.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ctgtodd::SimpleRationalTerm;
use crate::error::{Error, Result};
use crate::modfield::{crt_rational, rational_reconstruct, FieldCtx, Residue};
use crate::series::TruncSeries;

/// Default cap on the degree of a combined denominator.
pub const DEFAULT_DEGREE_CAP: usize = 4096;

/// Dense polynomial helpers over `Z_p`; index = power of `t`.
pub(crate) mod poly {
    use super::*;

    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    /// Multiplies in place by `(1 - t^m)^k`.
    pub fn mul_binomial_pow(ctx: &FieldCtx, a: &mut Vec<u64>, m: usize, k: usize) {
        for _ in 0..k {
            a.resize(a.len() + m, 0);
            for i in (m..a.len()).rev() {
                a[i] = ctx.sub(a[i], a[i - m]);
            }
        }
    }

    /// `(quotient, remainder)`; `b` must be nonzero after trimming.
    pub fn divrem(ctx: &FieldCtx, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead_inv = ctx.inv(b[db]).expect("nonzero leading coefficient");
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let mut q = vec![0u64; r.len() - db];
        for i in (0..q.len()).rev() {
            let c = ctx.mul(r[i + db], lead_inv);
            q[i] = c;
            if c != 0 {
                for (j, &bj) in b.iter().enumerate() {
                    r[i + j] = ctx.sub(r[i + j], ctx.mul(c, bj));
                }
            }
        }
        r.truncate(db);
        trim(&mut r);
        (q, r)
    }

    pub fn gcd(ctx: &FieldCtx, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let (_, r) = divrem(ctx, &x, &y);
            x = y;
            y = r;
        }
        x
    }
}

/// `num / den` with `gcd(num, den) = 1`, scaled so the denominator has
/// constant term 1 (or is monic when `t` divides it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunctionT {
    pub ctx: FieldCtx,
    pub num: Vec<Residue>,
    pub den: Vec<Residue>,
}

impl RationalFunctionT {
    pub fn zero(ctx: &FieldCtx) -> Self {
        RationalFunctionT {
            ctx: ctx.clone(),
            num: Vec::new(),
            den: vec![1],
        }
    }

    /// Reduces by the gcd and normalizes the scaling.
    pub fn reduced(ctx: &FieldCtx, mut num: Vec<u64>, mut den: Vec<u64>) -> Self {
        poly::trim(&mut num);
        poly::trim(&mut den);
        assert!(!den.is_empty(), "zero denominator");
        if num.is_empty() {
            return Self::zero(ctx);
        }
        let g = poly::gcd(ctx, &num, &den);
        if g.len() > 1 {
            num = poly::divrem(ctx, &num, &g).0;
            den = poly::divrem(ctx, &den, &g).0;
        }
        let lead = if den[0] != 0 { den[0] } else { *den.last().unwrap() };
        let s = ctx.inv(lead).expect("nonzero");
        for c in num.iter_mut().chain(den.iter_mut()) {
            *c = ctx.mul(*c, s);
        }
        RationalFunctionT {
            ctx: ctx.clone(),
            num,
            den,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Power series coefficients `t^0 .. t^{k-1}`; requires `den(0) != 0`.
    pub fn expand(&self, k: usize) -> Result<Vec<Residue>> {
        let mut num = self.num.clone();
        num.resize(k.max(num.len()), 0);
        num.truncate(k);
        let mut den = self.den.clone();
        den.resize(k.max(den.len()), 0);
        den.truncate(k);
        let n = TruncSeries::new(&self.ctx, num);
        let d = TruncSeries::new(&self.ctx, den);
        Ok(n.div(&d)?.into_coeffs())
    }

    /// Writes the denominator as a product of binomials `(1 - t^b)^k` when
    /// it factors that way (searching larger `b` first).
    pub fn binomial_factors(&self) -> Option<Vec<(usize, usize)>> {
        factor_binomials(&self.ctx, &self.den)
    }
}

fn factor_binomials(ctx: &FieldCtx, den: &[u64]) -> Option<Vec<(usize, usize)>> {
    let mut rest = den.to_vec();
    poly::trim(&mut rest);
    if rest.first() != Some(&1) {
        return None;
    }
    let mut out = Vec::new();
    let mut b = rest.len().saturating_sub(1);
    while b >= 1 && rest.len() > 1 {
        let mut binom = vec![0u64; b + 1];
        binom[0] = 1;
        binom[b] = ctx.neg(1);
        let mut k = 0;
        loop {
            if rest.len() <= b {
                break;
            }
            let (q, r) = poly::divrem(ctx, &rest, &binom);
            if !r.is_empty() {
                break;
            }
            rest = q;
            k += 1;
        }
        if k > 0 {
            out.push((b, k));
        }
        b -= 1;
    }
    (rest == [1]).then_some(out)
}

/// Sums simple terms into one reduced rational function.
pub fn combine_rational(ctx: &FieldCtx, terms: &[SimpleRationalTerm], degree_cap: usize) -> Result<RationalFunctionT> {
    if terms.is_empty() {
        return Ok(RationalFunctionT::zero(ctx));
    }
    let normal: Vec<SimpleRationalTerm> = terms
        .iter()
        .map(|t| t.normalize(ctx))
        .collect::<Result<_>>()?;
    // common denominator: each binomial at its largest positive power
    let mut common: std::collections::BTreeMap<i64, i64> = std::collections::BTreeMap::new();
    for t in &normal {
        for &(m, e) in &t.den {
            let slot = common.entry(m).or_insert(0);
            *slot = (*slot).max(e);
        }
    }
    let e_min = normal.iter().map(|t| t.t_exp).min().unwrap().min(0);
    let den_degree: i128 = common.iter().map(|(&m, &e)| m as i128 * e as i128).sum::<i128>() - e_min as i128;
    let spread: i128 = normal
        .iter()
        .map(|t| {
            let extra: i128 = common
                .iter()
                .map(|(&m, &k)| {
                    let own = t.den.iter().find(|x| x.0 == m).map_or(0, |x| x.1);
                    m as i128 * (k - own) as i128
                })
                .sum();
            (t.t_exp - e_min) as i128 + extra
        })
        .max()
        .unwrap();
    let degree = den_degree.max(spread);
    if degree > degree_cap as i128 {
        return Err(Error::DegreeOverflow {
            degree: degree.min(usize::MAX as i128) as usize,
            cap: degree_cap,
        });
    }

    // terms sharing a binomial pattern add their t-shifted coefficients first
    let mut by_pattern: std::collections::BTreeMap<Vec<(i64, i64)>, Vec<u64>> = Default::default();
    for t in &normal {
        let acc = by_pattern.entry(t.den.clone()).or_default();
        let at = (t.t_exp - e_min) as usize;
        if acc.len() <= at {
            acc.resize(at + 1, 0);
        }
        acc[at] = ctx.add(acc[at], t.coeff);
    }
    let mut num: Vec<u64> = Vec::new();
    for (pattern, mut part) in by_pattern {
        for (&m, &k) in &common {
            let own = pattern.iter().find(|x| x.0 == m).map_or(0, |x| x.1);
            poly::mul_binomial_pow(ctx, &mut part, m as usize, (k - own) as usize);
        }
        if num.len() < part.len() {
            num.resize(part.len(), 0);
        }
        for (a, b) in num.iter_mut().zip(&part) {
            *a = ctx.add(*a, *b);
        }
    }
    let mut den = vec![0u64; (-e_min) as usize + 1];
    den[(-e_min) as usize] = 1;
    for (&m, &k) in &common {
        poly::mul_binomial_pow(ctx, &mut den, m as usize, k as usize);
    }
    Ok(RationalFunctionT::reduced(ctx, num, den))
}

/// A rational function in `t` with rational coefficients, recovered from
/// several primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunctionQ {
    pub num: Vec<BigRational>,
    pub den: Vec<BigRational>,
}

impl RationalFunctionQ {
    /// Coefficientwise CRT of normalized images over distinct primes; the
    /// images must have matching shapes.
    pub fn from_images(images: &[RationalFunctionT]) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| Error::Invalid("no images to combine".into()))?;
        if images
            .iter()
            .any(|f| f.num.len() != first.num.len() || f.den.len() != first.den.len())
        {
            return Err(Error::Invalid(
                "images disagree in degree; a prime was unlucky".into(),
            ));
        }
        let lift = |pick: &dyn Fn(&RationalFunctionT) -> &Vec<u64>, len: usize| -> Result<Vec<BigRational>> {
            (0..len)
                .map(|i| {
                    let res: Vec<(u64, u64)> = images.iter().map(|f| (pick(f)[i], f.ctx.p())).collect();
                    crt_rational(&res)?.ok_or_else(|| {
                        Error::Invalid(format!("coefficient {i} has no small rational lift"))
                    })
                })
                .collect()
        };
        Ok(RationalFunctionQ {
            num: lift(&|f| &f.num, first.num.len())?,
            den: lift(&|f| &f.den, first.den.len())?,
        })
    }

    /// Power series coefficients `t^0 .. t^{k-1}` over the rationals.
    pub fn expand(&self, k: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); k];
        let d0 = self.den[0].clone();
        for n in 0..k {
            let mut acc = self.num.get(n).cloned().unwrap_or_else(BigRational::zero);
            for j in 1..self.den.len().min(n + 1) {
                acc -= &self.den[j] * &out[n - j];
            }
            out[n] = acc / &d0;
        }
        out
    }
}

fn fmt_poly<T>(coeffs: &[T], fmt_coeff: impl Fn(&T) -> Option<(bool, String)>) -> String {
    // fmt_coeff returns (negative, |c|) or None for zero
    let mut s = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        let Some((neg, mag)) = fmt_coeff(c) else { continue };
        if neg {
            s.push('-');
        } else if !s.is_empty() {
            s.push('+');
        }
        let power = match k {
            0 => String::new(),
            1 => "t".to_string(),
            _ => format!("t^{k}"),
        };
        if k == 0 {
            s.push_str(&mag);
        } else if mag != "1" {
            s.push_str(&mag);
            s.push('*');
            s.push_str(&power);
        } else {
            s.push_str(&power);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn fmt_den(factors: Option<Vec<(usize, usize)>>, fallback: String) -> String {
    match factors {
        Some(f) if f.is_empty() => String::new(),
        Some(f) => f
            .iter()
            .map(|&(b, k)| {
                let base = if b == 1 { "(1-t)".to_string() } else { format!("(1-t^{b})") };
                if k == 1 {
                    base
                } else {
                    format!("{base}^{k}")
                }
            })
            .collect::<Vec<_>>()
            .join("*"),
        None => format!("({fallback})"),
    }
}

fn wrap_num(num: String, has_den: bool, plain: bool) -> String {
    if has_den && !plain {
        format!("({num})")
    } else {
        num
    }
}

fn is_single_monomial(s: &str) -> bool {
    !s[1..].contains(['+', '-'])
}

impl fmt::Display for RationalFunctionT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = &self.ctx;
        let coeff = |c: &u64| -> Option<(bool, String)> {
            if *c == 0 {
                return None;
            }
            Some(match rational_reconstruct(*c, ctx) {
                Some((n, 1)) => (n < 0, n.unsigned_abs().to_string()),
                Some((n, d)) => (n < 0, format!("{}/{}", n.unsigned_abs(), d)),
                None => (false, c.to_string()),
            })
        };
        let num = fmt_poly(&self.num, coeff);
        let den = fmt_den(self.binomial_factors(), fmt_poly(&self.den, coeff));
        if den.is_empty() {
            return f.write_str(&num);
        }
        let plain = is_single_monomial(&num);
        write!(f, "{}/{}", wrap_num(num, true, plain), den)
    }
}

impl fmt::Display for RationalFunctionQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeff = |c: &BigRational| -> Option<(bool, String)> {
            if c.is_zero() {
                return None;
            }
            let mag = c.abs();
            let s = if mag.denom().is_one() {
                mag.numer().to_string()
            } else {
                format!("{}/{}", mag.numer(), mag.denom())
            };
            Some((c.is_negative(), s))
        };
        let num = fmt_poly(&self.num, coeff);
        // binomial factoring is read off an integer image of the denominator
        let factors = if self.den.iter().all(|c| c.is_integer()) && self.den[0].is_one() {
            let big: Vec<BigInt> = self.den.iter().map(|c| c.to_integer()).collect();
            factor_binomials_z(&big)
        } else {
            None
        };
        let den = fmt_den(factors, fmt_poly(&self.den, coeff));
        if den.is_empty() {
            return f.write_str(&num);
        }
        let plain = is_single_monomial(&num);
        write!(f, "{}/{}", wrap_num(num, true, plain), den)
    }
}

/// Integer version of the binomial factor search.
fn factor_binomials_z(den: &[BigInt]) -> Option<Vec<(usize, usize)>> {
    let mut rest: Vec<BigInt> = den.to_vec();
    while rest.last().is_some_and(|c| c.is_zero()) {
        rest.pop();
    }
    let mut out = Vec::new();
    let mut b = rest.len().saturating_sub(1);
    while b >= 1 && rest.len() > 1 {
        let mut k = 0;
        // divide by 1 - t^b: q_i = r_i + q_{i-b}
        while rest.len() > b {
            let n = rest.len() - b;
            let mut q = vec![BigInt::zero(); n];
            for i in 0..n {
                q[i] = rest[i].clone() + if i >= b { q[i - b].clone() } else { BigInt::zero() };
            }
            // check the remainder: coefficients n..len of q*(1-t^b) must match
            let mut prod = vec![BigInt::zero(); rest.len()];
            for (i, c) in q.iter().enumerate() {
                prod[i] += c;
                prod[i + b] -= c;
            }
            if prod != rest {
                break;
            }
            rest = q;
            k += 1;
        }
        if k > 0 {
            out.push((b, k));
        }
        b -= 1;
    }
    (rest.len() == 1 && rest[0].is_one()).then_some(out)
}
