//! Generalized Todd polynomials.
//!
//! With `f(s) = s/(e^s - 1)` and `f(s,y) = 1/(1 - y(e^s - 1))`, the sequence
//! `gtd_n` is the coefficient list of
//!
//! ```text
//! F(s) = e^{as} prod_{B0} f(bs) / prod_{B0bar} f(bs)
//!        * prod_i prod_{Bi} f(bs, y_i) / prod_{Bibar} f(bs, y_i).
//! ```
//!
//! Everything is computed on the logarithm: `ln F` is a linear combination
//! of `h(s) = ln f(s)` and `h(s,y) = ln f(s,y)` whose coefficients are scaled
//! by power sums of the multisets, followed by a single exponential.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::modfield::{poly_mul, FieldCtx, Residue};
use crate::regseries::{RegularSeries, DEFAULT_MAX_VARS};
use crate::series::{exp_slice, log_slice, TruncSeries};

/// A multiset of nonzero integers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiSetZ {
    elements: Vec<i64>,
}

impl MultiSetZ {
    pub fn new(elements: Vec<i64>) -> Result<Self> {
        if elements.contains(&0) {
            return Err(Error::Invalid("multiset elements must be nonzero".into()));
        }
        Ok(MultiSetZ { elements })
    }

    /// Like [`MultiSetZ::new`] but keeps zero entries. A zero `b` in a
    /// `(B_i, Bbar_i)` pair stands for a factor `1 - t_i` that does not
    /// involve `s`; its `h(bs, y)` vanishes identically.
    pub fn with_zeros(elements: Vec<i64>) -> Self {
        MultiSetZ { elements }
    }

    pub fn empty() -> Self {
        MultiSetZ::default()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[i64] {
        &self.elements
    }

    pub fn push(&mut self, b: i64) -> Result<()> {
        if b == 0 {
            return Err(Error::Invalid("multiset elements must be nonzero".into()));
        }
        self.elements.push(b);
        Ok(())
    }

    pub fn residues(&self, ctx: &FieldCtx) -> Vec<Residue> {
        self.elements.iter().map(|&b| ctx.from_i64(b)).collect()
    }

    /// Exact first power sum.
    pub fn sum(&self) -> i128 {
        self.elements.iter().map(|&b| b as i128).sum()
    }

    pub fn product(&self) -> BigInt {
        self.elements.iter().map(|&b| BigInt::from(b)).product()
    }
}

/// Exact `prod (1 - b s)` by a balanced product tree.
fn linear_product(ctx: &FieldCtx, bs: &[Residue]) -> Vec<u64> {
    match bs.len() {
        0 => vec![1],
        1 => vec![1, ctx.neg(bs[0])],
        n => {
            let (l, r) = bs.split_at(n / 2);
            let a = linear_product(ctx, l);
            let b = linear_product(ctx, r);
            poly_mul(ctx, &a, &b, n + 1)
        }
    }
}

/// Power sums `p_0(B), ..., p_{d-1}(B)` of residues, with `p_0 = |B|`.
///
/// Uses `-ln prod (1 - b s) = sum_n p_n s^n / n`, splitting `B` into blocks
/// of at most `d - 1` elements so every partial product has degree below
/// `d`.
pub fn power_sums(ctx: &FieldCtx, bs: &[Residue], d: usize) -> Result<Vec<Residue>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut out = vec![0u64; d];
    out[0] = bs.len() as u64 % ctx.p();
    if d == 1 || bs.is_empty() {
        return Ok(out);
    }
    for chunk in bs.chunks(d - 1) {
        let prod = linear_product(ctx, chunk);
        let lg = log_slice(ctx, &prod, d)?;
        for n in 1..d {
            // p_n = -n [s^n] ln prod
            let v = ctx.mul(ctx.neg(lg[n]), n as u64);
            out[n] = ctx.add(out[n], v);
        }
    }
    Ok(out)
}

pub fn power_sums_of(ctx: &FieldCtx, b: &MultiSetZ, d: usize) -> Result<Vec<Residue>> {
    power_sums(ctx, &b.residues(ctx), d)
}

/// `p_n(B) - p_n(Bbar)` for `n < d`.
fn power_sum_difference(ctx: &FieldCtx, b: &[Residue], bbar: &[Residue], d: usize) -> Result<Vec<Residue>> {
    let pb = power_sums(ctx, b, d)?;
    let pbar = power_sums(ctx, bbar, d)?;
    Ok(pb.iter().zip(&pbar).map(|(&x, &y)| ctx.sub(x, y)).collect())
}

/// `h(s) = ln(s / (e^s - 1)) mod s^d`, as `-ln` of `(e^s - 1)/s`.
pub fn build_h(ctx: &FieldCtx, d: usize) -> Result<TruncSeries> {
    if d == 0 {
        return Ok(TruncSeries::zero(ctx, 0));
    }
    if d as u64 >= ctx.p() {
        return Err(Error::CharTooSmall { p: ctx.p(), d });
    }
    let inv_fact = ctx.inverse_factorials(d);
    // (e^s - 1)/s = sum_{n<d} s^n / (n+1)!
    let g: Vec<u64> = (0..d).map(|n| inv_fact[n + 1]).collect();
    let lg = log_slice(ctx, &g, d)?;
    Ok(TruncSeries::new(ctx, lg.into_iter().map(|c| ctx.neg(c)).collect()))
}

/// `h(s,y) = -ln(1 - y(e^s - 1)) mod s^d`, regular in the single variable `y`.
pub fn build_hy(ctx: &FieldCtx, d: usize) -> Result<RegularSeries> {
    if d as u64 >= ctx.p() {
        return Err(Error::CharTooSmall { p: ctx.p(), d });
    }
    let mut f = RegularSeries::one(ctx, 1, d)?;
    let inv_fact = ctx.inverse_factorials(d);
    for (n, &w) in inv_fact.iter().enumerate().take(d).skip(1) {
        f.add_term(n, &[1], ctx.neg(w))?;
    }
    Ok(f.log()?.scale(ctx.neg(1)))
}

/// `sum_{b in B} h(bs)`: the coefficient `h_n` is multiplied by `p_n(B)`.
pub fn sum_similar(h: &TruncSeries, psums: &[Residue]) -> TruncSeries {
    let ctx = h.ctx();
    let c = h
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, &x)| ctx.mul(x, psums.get(n).copied().unwrap_or(0)))
        .collect();
    TruncSeries::new(ctx, c)
}

/// Regular-series counterpart of [`sum_similar`].
pub fn sum_similar_reg(h: &RegularSeries, psums: &[Residue]) -> RegularSeries {
    h.scale_degrees(psums)
}

/// Cached `h(s)` and `h(s,y)` for one field, reusable for all shorter
/// truncations.
#[derive(Debug, Clone)]
pub struct BaseSeries {
    ctx: FieldCtx,
    h: TruncSeries,
    hy: Option<RegularSeries>,
}

impl BaseSeries {
    /// Builds `h` modulo `s^d`, and `h(s,y)` as well when `with_hy` is set.
    pub fn new(ctx: &FieldCtx, d: usize, with_hy: bool) -> Result<Self> {
        let h = build_h(ctx, d)?;
        let hy = if with_hy { Some(build_hy(ctx, d)?) } else { None };
        Ok(BaseSeries {
            ctx: ctx.clone(),
            h,
            hy,
        })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.h.d()
    }

    pub fn is_empty(&self) -> bool {
        self.h.d() == 0
    }

    pub fn h(&self, d: usize) -> Result<TruncSeries> {
        if d > self.h.d() {
            return build_h(&self.ctx, d);
        }
        Ok(self.h.truncate(d))
    }

    pub fn hy(&self, d: usize) -> Result<RegularSeries> {
        match &self.hy {
            Some(hy) if d <= hy.d() => hy.truncate(d),
            _ => build_hy(&self.ctx, d),
        }
    }
}

/// Parameters of a generalized Todd sequence.
#[derive(Debug, Clone)]
pub struct GToddSpec {
    pub a: BigRational,
    pub b0: MultiSetZ,
    pub b0bar: MultiSetZ,
    /// `(B_i, Bbar_i)` for `i = 1..r`; `y_i` is the variable of pair `i`.
    pub pairs: Vec<(MultiSetZ, MultiSetZ)>,
    /// Number of output terms.
    pub d: usize,
    pub max_vars: usize,
}

impl GToddSpec {
    pub fn new(d: usize) -> Self {
        GToddSpec {
            a: BigRational::from_integer(0.into()),
            b0: MultiSetZ::empty(),
            b0bar: MultiSetZ::empty(),
            pairs: Vec::new(),
            d,
            max_vars: DEFAULT_MAX_VARS,
        }
    }

    pub fn r(&self) -> usize {
        self.pairs.len()
    }
}

/// `gtd_0, ..., gtd_{d-1}` as a regular series in `y_1..y_r`.
pub fn gtodd(ctx: &FieldCtx, spec: &GToddSpec) -> Result<RegularSeries> {
    let base = BaseSeries::new(ctx, spec.d, spec.r() > 0)?;
    gtodd_with(&base, spec)
}

pub fn gtodd_with(base: &BaseSeries, spec: &GToddSpec) -> Result<RegularSeries> {
    let ctx = base.ctx();
    let (d, r) = (spec.d, spec.r());
    if d as u64 >= ctx.p() {
        return Err(Error::CharTooSmall { p: ctx.p(), d });
    }
    let mut big_h = RegularSeries::zero_capped(ctx, r, d, spec.max_vars)?;
    if d == 0 {
        return Ok(big_h);
    }

    let h = base.h(d)?;
    let diff0 = power_sum_difference(ctx, &spec.b0.residues(ctx), &spec.b0bar.residues(ctx), d)?;
    let mut h0 = sum_similar(&h, &diff0).into_coeffs();
    if d > 1 {
        h0[1] = ctx.add(h0[1], ctx.from_rational(&spec.a)?);
    }
    let origin = vec![0u32; r];
    for (n, &v) in h0.iter().enumerate().skip(1) {
        big_h.add_term(n, &origin, v)?;
    }

    if r > 0 {
        let hy = base.hy(d)?;
        for (i, (bi, bibar)) in spec.pairs.iter().enumerate() {
            if bi.is_empty() && bibar.is_empty() {
                continue;
            }
            let diff = power_sum_difference(ctx, &bi.residues(ctx), &bibar.residues(ctx), d)?;
            let part = sum_similar_reg(&hy, &diff);
            let mut e = vec![0u32; r];
            for (n, exps, v) in part.terms() {
                e[i] = exps[0];
                big_h.add_term(n, &e, v)?;
            }
        }
    }
    let f = big_h.exp()?;
    debug_assert!(f.d() == 0 || f.coeff(0, &origin) == 1);
    Ok(f)
}

/// The shift `a = (p_1(B0) - p_1(B0bar)) / 2` that makes the `r = 0` Todd
/// series even.
pub fn even_shift(b0: &MultiSetZ, b0bar: &MultiSetZ) -> BigRational {
    BigRational::new(BigInt::from(b0.sum() - b0bar.sum()), BigInt::from(2))
}

/// `e^{as} prod_{B0} f(bs) / prod_{B0bar} f(bs) mod s^d` with `a` given by
/// [`even_shift`].
///
/// The shifted logarithm only has even powers, so the exponential is taken
/// in `s^2` at half length and spread back out; odd coefficients are zero.
pub fn todd_r0(ctx: &FieldCtx, b0: &MultiSetZ, b0bar: &MultiSetZ, d: usize) -> Result<TruncSeries> {
    let base = BaseSeries::new(ctx, d, false)?;
    todd_r0_with(&base, b0, b0bar, d)
}

pub fn todd_r0_with(base: &BaseSeries, b0: &MultiSetZ, b0bar: &MultiSetZ, d: usize) -> Result<TruncSeries> {
    let ctx = base.ctx();
    if d as u64 >= ctx.p() {
        return Err(Error::CharTooSmall { p: ctx.p(), d });
    }
    // even coefficients 0, 2, ..., below d
    let half = d.div_ceil(2);
    let h = base.h(d)?;
    let sq = |m: &MultiSetZ| -> Vec<Residue> {
        m.residues(ctx).iter().map(|&b| ctx.mul(b, b)).collect()
    };
    let diff = power_sum_difference(ctx, &sq(b0), &sq(b0bar), half)?;
    // Hbar_n = h_{2n} (p_{2n}(B0) - p_{2n}(B0bar)) with p_{2n}(B) = p_n(B^2)
    let mut hbar = vec![0u64; half];
    for n in 1..half {
        hbar[n] = ctx.mul(h.coeff(2 * n), diff[n]);
    }
    let fbar = exp_slice(ctx, &hbar, half)?;
    let mut out = vec![0u64; d];
    for (n, &v) in fbar.iter().enumerate() {
        out[2 * n] = v;
    }
    let f = TruncSeries::new(ctx, out);
    assert!(f.coeffs().iter().skip(1).step_by(2).all(|&c| c == 0));
    Ok(f)
}
