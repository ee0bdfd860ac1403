//! Series in `R[y_1..y_r][[s]] mod s^d` that are regular in `y`: the
//! coefficient of `s^n` has total y-degree at most `n`.
//!
//! Every fast operation packs the series into one variable with the
//! Kronecker substitution `y_i -> y_1^{d^{i-1}}`, `s -> y_1^{d^r}`. Regularity
//! keeps every y-exponent below `d`, so the packing is injective and
//! products never carry between digits.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::modfield::{poly_mul, FieldCtx, Residue};
use crate::series::{exp_blocks, inv_slice, log_blocks, TruncSeries};

/// Default cap on the number of y-variables.
pub const DEFAULT_MAX_VARS: usize = 8;
/// Largest packed length `d^{r+1}` accepted by the Kronecker operations.
pub const MAX_PACKED_LEN: usize = 1 << 22;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Monomials in `r` variables of total degree `< d`, in graded order.
///
/// Monomials of degree at most `n` form a prefix of this order, so a slot
/// index does not depend on which coefficient of `s` it belongs to.
#[derive(Debug)]
pub struct MonomialIndex {
    r: usize,
    d: usize,
    exps: Vec<Vec<u32>>,
    degree: Vec<u32>,
    kron: Vec<usize>,
    /// `d^r` entries; `u32::MAX` marks an exponent vector of degree `>= d`.
    slot_of_kron: Vec<u32>,
}

impl MonomialIndex {
    pub fn new(r: usize, d: usize) -> Result<Self> {
        let block = checked_pow(d, r)?;
        let mut exps = Vec::new();
        for deg in 0..d {
            push_degree(r, deg as u32, &mut Vec::new(), &mut exps);
        }
        let degree: Vec<u32> = exps.iter().map(|e| e.iter().sum()).collect();
        let kron: Vec<usize> = exps
            .iter()
            .map(|e| {
                e.iter()
                    .rev()
                    .fold(0usize, |acc, &x| acc * d + x as usize)
            })
            .collect();
        let mut slot_of_kron = vec![u32::MAX; block.max(1)];
        for (slot, &k) in kron.iter().enumerate() {
            slot_of_kron[k] = slot as u32;
        }
        Ok(MonomialIndex {
            r,
            d,
            exps,
            degree,
            kron,
            slot_of_kron,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of monomials of total degree at most `n`.
    pub fn count_upto(&self, n: usize) -> usize {
        binomial(n + self.r, self.r)
    }

    pub fn exponents(&self, slot: usize) -> &[u32] {
        &self.exps[slot]
    }

    pub fn degree(&self, slot: usize) -> u32 {
        self.degree[slot]
    }

    /// Exponent of `y_1` after `y_i -> y_1^{d^{i-1}}`.
    pub fn kron(&self, slot: usize) -> usize {
        self.kron[slot]
    }

    pub fn slot_of_kron(&self, k: usize) -> Option<usize> {
        match self.slot_of_kron.get(k) {
            Some(&s) if s != u32::MAX => Some(s as usize),
            _ => None,
        }
    }

    pub fn slot_of(&self, exps: &[u32]) -> Option<usize> {
        if exps.len() != self.r || exps.iter().any(|&e| e as usize >= self.d) {
            return None;
        }
        let k = exps
            .iter()
            .rev()
            .fold(0usize, |acc, &x| acc * self.d + x as usize);
        self.slot_of_kron(k)
    }
}

// lexicographically decreasing in y_1 first, within one total degree
fn push_degree(r: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == r {
        prefix.push(deg);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    if r == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=deg).rev() {
        prefix.push(e);
        push_degree(r, deg - e, prefix, out);
        prefix.pop();
    }
}

fn checked_pow(d: usize, e: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..e {
        acc = acc
            .checked_mul(d)
            .filter(|&v| v <= MAX_PACKED_LEN)
            .ok_or_else(|| {
                Error::ResourceCap(format!(
                    "packed length {d}^{e} exceeds {MAX_PACKED_LEN}"
                ))
            })?;
    }
    Ok(acc)
}

/// Which Kronecker substitution produced an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KroneckerKind {
    /// `y_i -> y_1^{d^{i-1}}` applied to one coefficient of `s`.
    GammaY,
    /// `s -> y_1^{d^r}` only; the y-variables are kept.
    GammaS,
    /// Both substitutions: the whole series as one polynomial in `y_1`.
    GammaBar,
}

/// A univariate polynomial in `y_1` obtained by Kronecker packing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KroneckerImage {
    pub kind: KroneckerKind,
    pub d: usize,
    pub r: usize,
    pub coeffs: Vec<Residue>,
}

/// A regular series stored densely over the regularity simplex.
#[derive(Clone)]
pub struct RegularSeries {
    ctx: FieldCtx,
    index: Arc<MonomialIndex>,
    /// coefficient `n` occupies `offset(n) .. offset(n+1)`, one entry per
    /// monomial of degree at most `n`
    coeffs: Vec<Residue>,
}

impl PartialEq for RegularSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx
            && self.r() == other.r()
            && self.d() == other.d()
            && self.coeffs == other.coeffs
    }
}

impl Eq for RegularSeries {}

impl fmt::Debug for RegularSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RegularSeries(p={}, r={}, d={}, terms={:?})",
            self.ctx.p(),
            self.r(),
            self.d(),
            self.terms().collect::<Vec<_>>()
        )
    }
}

impl RegularSeries {
    pub fn zero(ctx: &FieldCtx, r: usize, d: usize) -> Result<Self> {
        Self::zero_capped(ctx, r, d, DEFAULT_MAX_VARS)
    }

    pub fn zero_capped(ctx: &FieldCtx, r: usize, d: usize, max_vars: usize) -> Result<Self> {
        if r > max_vars {
            return Err(Error::ResourceCap(format!(
                "{r} y-variables exceed the cap {max_vars}"
            )));
        }
        let index = Arc::new(MonomialIndex::new(r, d)?);
        Ok(Self::with_index(ctx, index))
    }

    fn with_index(ctx: &FieldCtx, index: Arc<MonomialIndex>) -> Self {
        let total = binomial(index.d + index.r, index.r + 1);
        RegularSeries {
            ctx: ctx.clone(),
            index,
            coeffs: vec![0; total],
        }
    }

    pub fn one(ctx: &FieldCtx, r: usize, d: usize) -> Result<Self> {
        let mut f = Self::zero(ctx, r, d)?;
        if d > 0 {
            f.coeffs[0] = 1;
        }
        Ok(f)
    }

    /// Builds a series from `(n, exponents, value)` triples; repeated
    /// entries add up.
    pub fn from_terms(
        ctx: &FieldCtx,
        r: usize,
        d: usize,
        terms: &[(usize, Vec<u32>, Residue)],
    ) -> Result<Self> {
        let mut f = Self::zero(ctx, r, d)?;
        for (n, e, v) in terms {
            f.add_term(*n, e, *v)?;
        }
        Ok(f)
    }

    /// Lifts a univariate series (`r = 0`).
    pub fn from_series(f: &TruncSeries) -> Result<Self> {
        let mut out = Self::zero(f.ctx(), 0, f.d())?;
        out.coeffs.copy_from_slice(f.coeffs());
        Ok(out)
    }

    /// The underlying univariate series when `r = 0`.
    pub fn to_series(&self) -> Option<TruncSeries> {
        (self.r() == 0).then(|| TruncSeries::new(&self.ctx, self.coeffs.clone()))
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn r(&self) -> usize {
        self.index.r
    }

    pub fn d(&self) -> usize {
        self.index.d
    }

    pub fn index(&self) -> &MonomialIndex {
        &self.index
    }

    fn offset(&self, n: usize) -> usize {
        binomial(n + self.r(), self.r() + 1)
    }

    /// Dense coefficients of `s^n`, one per monomial of degree at most `n`.
    pub fn coeff_slice(&self, n: usize) -> &[Residue] {
        &self.coeffs[self.offset(n)..self.offset(n + 1)]
    }

    pub fn coeff(&self, n: usize, exps: &[u32]) -> Residue {
        if n >= self.d() {
            return 0;
        }
        match self.index.slot_of(exps) {
            Some(slot) if (self.index.degree(slot) as usize) <= n => {
                self.coeffs[self.offset(n) + slot]
            }
            _ => 0,
        }
    }

    /// Adds `v * y^exps * s^n`, rejecting monomials that break regularity.
    pub fn add_term(&mut self, n: usize, exps: &[u32], v: Residue) -> Result<()> {
        if exps.len() != self.r() {
            return Err(Error::Invalid(format!(
                "monomial has {} exponents, series has {} variables",
                exps.len(),
                self.r()
            )));
        }
        if n >= self.d() {
            return Err(Error::Invalid(format!(
                "degree {n} outside truncation {}",
                self.d()
            )));
        }
        let degree = exps.iter().map(|&e| e as usize).sum::<usize>();
        if degree > n {
            return Err(Error::NotRegular { n, degree });
        }
        let slot = self.index.slot_of(exps).expect("regular monomial is indexed");
        let at = self.offset(n) + slot;
        self.coeffs[at] = self.ctx.add(self.coeffs[at], v % self.ctx.p());
        Ok(())
    }

    /// Nonzero terms as `(n, exponents, value)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &[u32], Residue)> + '_ {
        (0..self.d()).flat_map(move |n| {
            self.coeff_slice(n)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(move |(slot, &v)| (n, self.index.exponents(slot), v))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx || self.r() != other.r() || self.d() != other.d() {
            Err(Error::Mismatch)
        } else {
            Ok(())
        }
    }

    fn map2(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (a, &b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a = op(*a, b);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.map2(other, |a, b| self.ctx.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.map2(other, |a, b| self.ctx.sub(a, b))
    }

    pub fn scale(&self, c: Residue) -> Self {
        let mut out = self.clone();
        for a in out.coeffs.iter_mut() {
            *a = self.ctx.mul(*a, c);
        }
        out
    }

    /// Multiplies the coefficient of `s^n` by `w[n]`.
    pub fn scale_degrees(&self, w: &[Residue]) -> Self {
        let mut out = self.clone();
        for n in 0..self.d() {
            let (lo, hi) = (self.offset(n), self.offset(n + 1));
            let c = w.get(n).copied().unwrap_or(0);
            for a in &mut out.coeffs[lo..hi] {
                *a = self.ctx.mul(*a, c);
            }
        }
        out
    }

    /// Re-expresses a series in one variable (`r = 1`) as a series in `r`
    /// variables that only involves `y_var`.
    pub fn embed(&self, r: usize, var: usize) -> Result<Self> {
        if self.r() != 1 || var >= r {
            return Err(Error::Invalid(format!(
                "cannot embed a series in {} variables as variable {var} of {r}",
                self.r()
            )));
        }
        let mut out = Self::zero(&self.ctx, r, self.d())?;
        let mut e = vec![0u32; r];
        for (n, exps, v) in self.terms() {
            e[var] = exps[0];
            out.add_term(n, &e, v)?;
        }
        Ok(out)
    }

    /// Substitutes numeric values for every `y_i`, leaving a series in `s`.
    pub fn evaluate_y(&self, ys: &[Residue]) -> Result<TruncSeries> {
        if ys.len() != self.r() {
            return Err(Error::Mismatch);
        }
        let count = self.index.count_upto(self.d().saturating_sub(1));
        let values: Vec<u64> = (0..count)
            .map(|slot| {
                self.index
                    .exponents(slot)
                    .iter()
                    .zip(ys)
                    .fold(1, |acc, (&e, &y)| self.ctx.mul(acc, self.ctx.pow(y, e as u64)))
            })
            .collect();
        let out = (0..self.d())
            .map(|n| {
                self.coeff_slice(n)
                    .iter()
                    .zip(&values)
                    .fold(0, |acc, (&c, &v)| self.ctx.add(acc, self.ctx.mul(c, v)))
            })
            .collect();
        Ok(TruncSeries::new(&self.ctx, out))
    }

    /// Packed length of one s-coefficient: `d^r`.
    fn block(&self) -> usize {
        // bounded by MonomialIndex::new
        self.d().pow(self.r() as u32)
    }

    fn pack(&self, blocks: usize) -> Result<Vec<u64>> {
        let block = self.block();
        let len = blocks
            .checked_mul(block)
            .filter(|&l| l <= MAX_PACKED_LEN)
            .ok_or_else(|| {
                Error::ResourceCap(format!("packed length {blocks} x {block} too large"))
            })?;
        let mut out = vec![0u64; len];
        for n in 0..blocks.min(self.d()) {
            for (slot, &v) in self.coeff_slice(n).iter().enumerate() {
                out[n * block + self.index.kron(slot)] = v;
            }
        }
        Ok(out)
    }

    fn unpack(ctx: &FieldCtx, index: Arc<MonomialIndex>, packed: &[u64]) -> Result<Self> {
        let mut out = Self::with_index(ctx, index);
        let block = out.block();
        for n in 0..out.d() {
            let base = out.offset(n);
            let Some(chunk) = packed.get(n * block..(n + 1) * block) else {
                break;
            };
            for (k, &v) in chunk.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let slot = out.index.slot_of_kron(k);
                match slot {
                    Some(slot) if out.index.degree(slot) as usize <= n => {
                        out.coeffs[base + slot] = v;
                    }
                    _ => {
                        let degree = decode_digits(k, out.d(), out.r()).iter().sum::<u32>();
                        return Err(Error::NotRegular {
                            n,
                            degree: degree as usize,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Gamma_y` image of the coefficient of `s^n`.
    pub fn gamma_y(&self, n: usize) -> KroneckerImage {
        let mut coeffs = vec![0u64; self.block()];
        if n < self.d() {
            for (slot, &v) in self.coeff_slice(n).iter().enumerate() {
                coeffs[self.index.kron(slot)] = v;
            }
        }
        KroneckerImage {
            kind: KroneckerKind::GammaY,
            d: self.d(),
            r: self.r(),
            coeffs,
        }
    }

    /// Whole-series image under `y_i -> y_1^{d^{i-1}}, s -> y_1^{d^r}`.
    pub fn gamma_bar(&self) -> Result<KroneckerImage> {
        Ok(KroneckerImage {
            kind: KroneckerKind::GammaBar,
            d: self.d(),
            r: self.r(),
            coeffs: self.pack(self.d())?,
        })
    }

    /// Inverts [`Self::gamma_bar`] by reading base-`d` digits of exponents.
    pub fn un_gamma(ctx: &FieldCtx, img: &KroneckerImage) -> Result<Self> {
        if img.kind != KroneckerKind::GammaBar {
            return Err(Error::Invalid(
                "only whole-series images can be decoded".into(),
            ));
        }
        let index = Arc::new(MonomialIndex::new(img.r, img.d)?);
        Self::unpack(ctx, index, &img.coeffs)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let len = self.d() * self.block();
        let a = self.pack(self.d())?;
        let b = other.pack(other.d())?;
        let c = poly_mul(&self.ctx, &a, &b, len);
        Self::unpack(&self.ctx, self.index.clone(), &c)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.d() > 0 && self.coeffs[0] != 1 {
            return Err(Error::NotInvertibleConstantTerm);
        }
        let a = self.pack(self.d())?;
        let c = inv_slice(&self.ctx, &a, a.len())?;
        Self::unpack(&self.ctx, self.index.clone(), &c)
    }

    /// `ln f` through the packed image: s-derivative, one packed division,
    /// s-integration. Integration never touches the packed variable.
    pub fn log(&self) -> Result<Self> {
        let a = self.pack(self.d())?;
        let h = log_blocks(&self.ctx, &a, self.d(), self.block())?;
        Self::unpack(&self.ctx, self.index.clone(), &h)
    }

    /// `exp h` by Newton iteration carried out on packed images.
    pub fn exp(&self) -> Result<Self> {
        let a = self.pack(self.d())?;
        let f = exp_blocks(&self.ctx, &a, self.d(), self.block())?;
        Self::unpack(&self.ctx, self.index.clone(), &f)
    }

    /// The same series modulo `s^d`; coefficients beyond the old order are 0.
    pub fn truncate(&self, d: usize) -> Result<Self> {
        let mut out = Self::zero_capped(&self.ctx, self.r(), d, usize::MAX)?;
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        Ok(out)
    }

    /// Maximum total y-degree per s-coefficient, for diagnostics.
    pub fn y_degrees(&self) -> BTreeMap<usize, u32> {
        let mut out = BTreeMap::new();
        for (n, e, _) in self.terms() {
            let deg = e.iter().sum::<u32>();
            let entry = out.entry(n).or_insert(0);
            *entry = (*entry).max(deg);
        }
        out
    }
}

fn decode_digits(mut k: usize, d: usize, r: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(r);
    for _ in 0..r {
        out.push((k % d.max(1)) as u32);
        k /= d.max(1);
    }
    out
}
