//! Univariate truncated power series `f(s) mod s^d` over `Z_p`.
//!
//! The fast routines (Newton iteration for the reciprocal, logarithm and
//! exponential) work on coefficient slices so that the Kronecker-packed
//! multivariate code in [`crate::regseries`] can reuse them. The quadratic
//! recursions are kept alongside as independent reference implementations.

use std::fmt;

use crate::error::{Error, Result};
use crate::modfield::{poly_mul, FieldCtx, Residue};

/// Largest truncation accepted by [`coeff_reciprocal_prefix`].
pub const MAX_PREFIX_LEN: usize = 1 << 28;

/// Precision ladder for Newton iteration: `1, ..., ceil(d/2), d`.
pub(crate) fn newton_ladder(d: usize) -> Vec<usize> {
    let mut steps = Vec::new();
    let mut m = d;
    while m > 1 {
        steps.push(m);
        m = m.div_ceil(2);
    }
    steps.push(1);
    steps.reverse();
    steps
}

fn require_char(ctx: &FieldCtx, d: usize) -> Result<()> {
    if (d as u64) >= ctx.p() {
        Err(Error::CharTooSmall { p: ctx.p(), d })
    } else {
        Ok(())
    }
}

/// Reciprocal of `f mod s^d` by Newton iteration.
pub fn inv_slice(ctx: &FieldCtx, f: &[u64], d: usize) -> Result<Vec<u64>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let f0 = f.first().copied().unwrap_or(0);
    let g0 = ctx.inv(f0).ok_or(Error::NotInvertibleConstantTerm)?;
    let mut g = Vec::with_capacity(d);
    g.push(g0);
    let ladder = newton_ladder(d);
    for w in ladder.windows(2) {
        let (k, m) = (w[0], w[1]);
        // f * g = 1 + s^k * e (mod s^m)
        let fg = poly_mul(ctx, &f[..m.min(f.len())], &g, m);
        let e = &fg[k..m];
        let corr = poly_mul(ctx, &g, e, m - k);
        g.extend(corr.into_iter().map(|c| ctx.neg(c)));
    }
    Ok(g)
}

/// Reciprocal by the division recursion `g_i = (h_i - sum f_{i-k} g_k) / f_0`.
pub fn inv_schoolbook_slice(ctx: &FieldCtx, f: &[u64], d: usize) -> Result<Vec<u64>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let f0 = f.first().copied().unwrap_or(0);
    let f0_inv = ctx.inv(f0).ok_or(Error::NotInvertibleConstantTerm)?;
    let p = ctx.p() as u128;
    let mut g = vec![0u64; d];
    g[0] = f0_inv;
    for i in 1..d {
        let mut acc: u128 = 0;
        for k in i.saturating_sub(f.len() - 1)..i {
            acc += f[i - k] as u128 * g[k] as u128;
        }
        g[i] = ctx.mul(ctx.neg((acc % p) as u64), f0_inv);
    }
    Ok(g)
}

/// `f'` truncated to `d - 1` coefficients.
pub fn deriv_slice(ctx: &FieldCtx, f: &[u64]) -> Vec<u64> {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(n, &c)| ctx.mul(c, n as u64 % ctx.p()))
        .collect()
}

/// Antiderivative with constant term `c`; one coefficient longer than `f`.
pub fn integrate_slice(ctx: &FieldCtx, f: &[u64], c: u64) -> Result<Vec<u64>> {
    require_char(ctx, f.len())?;
    let inv = ctx.inverses_up_to(f.len());
    let mut out = Vec::with_capacity(f.len() + 1);
    out.push(c % ctx.p());
    out.extend(f.iter().enumerate().map(|(i, &x)| ctx.mul(x, inv[i + 1])));
    Ok(out)
}

/// `ln f mod s^d` for `f_0 = 1`, as the integral of `f' / f`.
pub fn log_slice(ctx: &FieldCtx, f: &[u64], d: usize) -> Result<Vec<u64>> {
    log_blocks(ctx, f, d, 1)
}

/// Logarithm of a series in `s` whose coefficients are packed polynomials
/// of `block` entries each (the Kronecker image of a regular series).
///
/// Differentiation and integration act on block indices only; the division
/// `f' / f` is a single univariate product in the packed variable. Requires
/// every intermediate y-degree to stay below the packing base.
pub(crate) fn log_blocks(ctx: &FieldCtx, f: &[u64], d: usize, block: usize) -> Result<Vec<u64>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    if f.first().copied().unwrap_or(0) != 1 || f[1..block.min(f.len())].iter().any(|&c| c != 0) {
        return Err(Error::ConstantTermNotOne);
    }
    require_char(ctx, d)?;
    let len = d * block;
    let head = &f[..len.min(f.len())];
    // f' in s, blockwise
    let mut fd = vec![0u64; (d - 1) * block];
    for n in 0..d - 1 {
        let src = (n + 1) * block;
        if src >= head.len() {
            break;
        }
        let k = (n + 1) as u64;
        let end = (src + block).min(head.len());
        for (j, &c) in head[src..end].iter().enumerate() {
            fd[n * block + j] = ctx.mul(c, k);
        }
    }
    let finv = inv_slice(ctx, head, (d - 1) * block)?;
    let q = poly_mul(ctx, &fd, &finv, (d - 1) * block);
    let inv = ctx.inverses_up_to(d);
    let mut h = vec![0u64; len];
    for n in 0..d - 1 {
        let w = inv[n + 1];
        for j in 0..block {
            h[(n + 1) * block + j] = ctx.mul(q[n * block + j], w);
        }
    }
    Ok(h)
}

/// `ln f` by the recursion `h_k = f_k - (1/k) sum_{i<k} i h_i f_{k-i}`.
pub fn log_schoolbook_slice(ctx: &FieldCtx, f: &[u64], d: usize) -> Result<Vec<u64>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    if f.first().copied().unwrap_or(0) != 1 {
        return Err(Error::ConstantTermNotOne);
    }
    require_char(ctx, d)?;
    let p = ctx.p() as u128;
    let inv = ctx.inverses_up_to(d);
    let fk = |k: usize| f.get(k).copied().unwrap_or(0);
    // work with i*h_i to save a multiplication in the inner loop
    let mut ih = vec![0u64; d];
    let mut h = vec![0u64; d];
    for k in 1..d {
        let mut acc: u128 = 0;
        for i in 1..k {
            acc += ih[i] as u128 * fk(k - i) as u128;
        }
        let s = ctx.mul((acc % p) as u64, inv[k]);
        h[k] = ctx.sub(fk(k), s);
        ih[k] = ctx.mul(h[k], k as u64);
    }
    Ok(h)
}

/// `exp h mod s^d` for `h_0 = 0` by Newton iteration on `ln phi - h = 0`.
///
/// Each step keeps the lower half of the previous iterate and only computes
/// the new upper half.
pub fn exp_slice(ctx: &FieldCtx, h: &[u64], d: usize) -> Result<Vec<u64>> {
    exp_blocks(ctx, h, d, 1)
}

/// Block-packed counterpart of [`exp_slice`]; see [`log_blocks`].
pub(crate) fn exp_blocks(ctx: &FieldCtx, h: &[u64], d: usize, block: usize) -> Result<Vec<u64>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    if h[..block.min(h.len())].iter().any(|&c| c != 0) {
        return Err(Error::ConstantTermNotZero);
    }
    require_char(ctx, d)?;
    let hk = |i: usize| h.get(i).copied().unwrap_or(0);
    let mut phi = vec![0u64; block];
    phi[0] = 1;
    let ladder = newton_ladder(d);
    for w in ladder.windows(2) {
        let (k, m) = (w[0], w[1]);
        let l = log_blocks(ctx, &phi, m, block)?;
        // ln phi - h vanishes below s^k
        let t: Vec<u64> = (k * block..m * block)
            .map(|i| ctx.sub(l[i], hk(i)))
            .collect();
        let upper = poly_mul(ctx, &phi, &t, (m - k) * block);
        phi.extend(upper.into_iter().map(|c| ctx.neg(c)));
    }
    debug_assert_eq!(phi[0], 1);
    Ok(phi)
}

/// `exp h` by the recursion `f_n = (1/n) sum_{i=1}^n i h_i f_{n-i}`.
pub fn exp_schoolbook_slice(ctx: &FieldCtx, h: &[u64], d: usize) -> Result<Vec<u64>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    if h.first().copied().unwrap_or(0) != 0 {
        return Err(Error::ConstantTermNotZero);
    }
    require_char(ctx, d)?;
    let p = ctx.p() as u128;
    let inv = ctx.inverses_up_to(d);
    let ih: Vec<u64> = (0..d)
        .map(|i| ctx.mul(h.get(i).copied().unwrap_or(0), i as u64))
        .collect();
    let mut f = vec![0u64; d];
    f[0] = 1;
    for n in 1..d {
        let mut acc: u128 = 0;
        for i in 1..=n {
            acc += ih[i] as u128 * f[n - i] as u128;
        }
        f[n] = ctx.mul((acc % p) as u64, inv[n]);
    }
    Ok(f)
}

/// A dense series `f_0 + f_1 s + ... + f_{d-1} s^{d-1}` over `Z_p`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    ctx: FieldCtx,
    coeffs: Vec<Residue>,
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncSeries(p={}, {:?})", self.ctx.p(), self.coeffs)
    }
}

impl TruncSeries {
    /// Wraps coefficients, reducing them into `[0, p)`.
    pub fn new(ctx: &FieldCtx, mut coeffs: Vec<u64>) -> Self {
        let p = ctx.p();
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        TruncSeries {
            ctx: ctx.clone(),
            coeffs,
        }
    }

    pub fn from_i64(ctx: &FieldCtx, coeffs: &[i64]) -> Self {
        TruncSeries {
            ctx: ctx.clone(),
            coeffs: coeffs.iter().map(|&c| ctx.from_i64(c)).collect(),
        }
    }

    pub fn zero(ctx: &FieldCtx, d: usize) -> Self {
        TruncSeries {
            ctx: ctx.clone(),
            coeffs: vec![0; d],
        }
    }

    pub fn one(ctx: &FieldCtx, d: usize) -> Self {
        let mut s = Self::zero(ctx, d);
        if d > 0 {
            s.coeffs[0] = 1;
        }
        s
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    /// Truncation order: the series is taken modulo `s^d`.
    pub fn d(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Residue] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Residue> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Residue {
        self.coeffs.get(n).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn wrap(&self, coeffs: Vec<u64>) -> Self {
        TruncSeries {
            ctx: self.ctx.clone(),
            coeffs,
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx || self.d() != other.d() {
            Err(Error::Mismatch)
        } else {
            Ok(())
        }
    }

    /// Same series modulo `s^d` (zero-padded when `d` grows).
    pub fn truncate(&self, d: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(d, 0);
        self.wrap(c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.wrap(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| self.ctx.add(a, b))
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.wrap(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| self.ctx.sub(a, b))
                .collect(),
        ))
    }

    pub fn negate(&self) -> Self {
        self.wrap(self.coeffs.iter().map(|&a| self.ctx.neg(a)).collect())
    }

    pub fn scale(&self, c: Residue) -> Self {
        self.wrap(self.coeffs.iter().map(|&a| self.ctx.mul(a, c)).collect())
    }

    /// `f(b s)`: the coefficient of `s^n` is multiplied by `b^n`.
    pub fn dilate(&self, b: Residue) -> Self {
        let mut pow = 1u64;
        let out = self
            .coeffs
            .iter()
            .map(|&a| {
                let v = self.ctx.mul(a, pow);
                pow = self.ctx.mul(pow, b);
                v
            })
            .collect();
        self.wrap(out)
    }

    /// `f'` modulo `s^{d-1}`; the top coefficient of `f` has no partner to
    /// produce a further term.
    pub fn deriv(&self) -> Self {
        self.wrap(deriv_slice(&self.ctx, &self.coeffs))
    }

    /// `C + integral f`, modulo `s^{d+1}`.
    pub fn integrate(&self, c: Residue) -> Result<Self> {
        Ok(self.wrap(integrate_slice(&self.ctx, &self.coeffs, c)?))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.wrap(poly_mul(&self.ctx, &self.coeffs, &other.coeffs, self.d())))
    }

    pub fn mul_schoolbook(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.wrap(crate::modfield::schoolbook_mul(
            &self.ctx,
            &self.coeffs,
            &other.coeffs,
            self.d(),
        )))
    }

    /// `self / f`, computed as `self * inv(f)`.
    pub fn div(&self, f: &Self) -> Result<Self> {
        self.mul(&f.inv()?)
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.wrap(inv_slice(&self.ctx, &self.coeffs, self.d())?))
    }

    pub fn inv_schoolbook(&self) -> Result<Self> {
        Ok(self.wrap(inv_schoolbook_slice(&self.ctx, &self.coeffs, self.d())?))
    }

    pub fn log(&self) -> Result<Self> {
        let h = self.wrap(log_slice(&self.ctx, &self.coeffs, self.d())?);
        assert!(h.d() == 0 || h.coeffs[0] == 0);
        Ok(h)
    }

    pub fn log_schoolbook(&self) -> Result<Self> {
        Ok(self.wrap(log_schoolbook_slice(&self.ctx, &self.coeffs, self.d())?))
    }

    pub fn exp(&self) -> Result<Self> {
        let f = self.wrap(exp_slice(&self.ctx, &self.coeffs, self.d())?);
        assert!(f.d() == 0 || f.coeffs[0] == 1);
        Ok(f)
    }

    pub fn exp_schoolbook(&self) -> Result<Self> {
        Ok(self.wrap(exp_schoolbook_slice(&self.ctx, &self.coeffs, self.d())?))
    }

    /// One-line text form: `d p c_0 c_1 ... c_{d-1}`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}", self.d(), self.ctx.p());
        for c in &self.coeffs {
            s.push(' ');
            s.push_str(&c.to_string());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            location: "series".into(),
            message,
        };
        let mut fields = text.split_whitespace();
        let d: usize = fields
            .next()
            .ok_or_else(|| parse_err("missing truncation order".into()))?
            .parse()
            .map_err(|e| parse_err(format!("truncation order: {e}")))?;
        let p: u64 = fields
            .next()
            .ok_or_else(|| parse_err("missing modulus".into()))?
            .parse()
            .map_err(|e| parse_err(format!("modulus: {e}")))?;
        let ctx = FieldCtx::new(p)?;
        let coeffs = fields
            .map(|f| {
                let v: u64 = f
                    .parse()
                    .map_err(|e| parse_err(format!("coefficient {f:?}: {e}")))?;
                if v >= p {
                    return Err(parse_err(format!("coefficient {v} not below {p}")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != d {
            return Err(parse_err(format!(
                "expected {d} coefficients, found {}",
                coeffs.len()
            )));
        }
        Ok(TruncSeries { ctx, coeffs })
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Sum of the first `bound + 1` coefficients of `1 / prod_j (1 - q^{b_j})`,
/// i.e. the number of nonnegative solutions of `sum b_j x_j <= bound`
/// reduced mod p.
///
/// Builds the product modulo `q^{bound+1}`, inverts it by Newton iteration
/// and sums the coefficients.
pub fn coeff_reciprocal_prefix(ctx: &FieldCtx, exponents: &[u64], bound: usize) -> Result<Residue> {
    if bound >= MAX_PREFIX_LEN {
        return Err(Error::ResourceCap(format!(
            "prefix bound {bound} exceeds {MAX_PREFIX_LEN}"
        )));
    }
    if exponents.contains(&0) {
        return Err(Error::ZeroExponentFactor);
    }
    let len = bound + 1;
    let mut prod = vec![0u64; len];
    prod[0] = 1;
    for &b in exponents {
        let b = b as usize;
        for i in (b..len).rev() {
            prod[i] = ctx.sub(prod[i], prod[i - b]);
        }
    }
    let g = inv_slice(ctx, &prod, len)?;
    Ok(g.iter().fold(0, |acc, &c| ctx.add(acc, c)))
}
