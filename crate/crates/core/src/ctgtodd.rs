//! Constant terms in `s` of functions of generalized Todd type:
//!
//! ```text
//! G(s) = L(e^s) prod_{B0bar} (1 - e^{bs}) / prod_{B0} (1 - e^{bs})
//!        * prod_i prod_{Bibar} (1 - e^{bs} t_i) / prod_{Bi} (1 - e^{bs} t_i)
//! ```
//!
//! with `L(k) = sum l_j k^{a_j}`. Writing `s^d G = A E(s) F(s)`, where `F` is
//! a generalized Todd series in `y_i = t_i/(1 - t_i)`, the constant term is
//! `A sum_n E_n F_{d-n}`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::modfield::{FieldCtx, Residue};
use crate::series::TruncSeries;
use crate::toddgen::{even_shift, gtodd_with, todd_r0_with, BaseSeries, GToddSpec, MultiSetZ};

/// One monomial `coeff * k^exponent * t^t_exp` of the numerator `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LTerm {
    pub coeff: BigRational,
    pub exponent: BigRational,
    pub t_exp: i64,
}

impl LTerm {
    pub fn new(coeff: i64, exponent: i64) -> Self {
        LTerm {
            coeff: BigRational::from_integer(coeff.into()),
            exponent: BigRational::from_integer(exponent.into()),
            t_exp: 0,
        }
    }
}

/// How `t_i` is given: a field element, or a power `t^m` of a formal `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TDescriptor {
    Numeric(Residue),
    Monomial(i64),
}

#[derive(Debug, Clone)]
pub struct CTPair {
    pub b: MultiSetZ,
    pub bbar: MultiSetZ,
    pub t: TDescriptor,
}

#[derive(Debug, Clone, Default)]
pub struct GToddConstantTermProblem {
    pub l: Vec<LTerm>,
    pub b0: MultiSetZ,
    pub b0bar: MultiSetZ,
    pub pairs: Vec<CTPair>,
}

impl GToddConstantTermProblem {
    /// `L(e^s) / prod_{B0} (1 - e^{bs})`.
    pub fn todd(l: Vec<LTerm>, b0: Vec<i64>) -> Result<Self> {
        Ok(GToddConstantTermProblem {
            l,
            b0: MultiSetZ::new(b0)?,
            ..Default::default()
        })
    }

    pub fn r(&self) -> usize {
        self.pairs.len()
    }

    pub fn d1(&self) -> i64 {
        self.b0.len() as i64 - self.b0bar.len() as i64
    }
}

/// `c * t^t_exp / prod (1 - t^m)^e` over the `(m, e)` pairs in `den`.
/// Negative `e` puts the binomial in the numerator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SimpleRationalTerm {
    pub coeff: Residue,
    pub t_exp: i64,
    pub den: Vec<(i64, i64)>,
}

impl SimpleRationalTerm {
    /// Sorts and merges the binomials and drops those with exponent 0.
    pub fn canonical(mut self) -> Self {
        let mut merged: BTreeMap<i64, i64> = BTreeMap::new();
        for (m, e) in self.den.drain(..) {
            *merged.entry(m).or_insert(0) += e;
        }
        self.den = merged.into_iter().filter(|&(_, e)| e != 0).collect();
        self
    }

    /// Rewrites every `1 - t^{-b}` as `-t^{-b} (1 - t^b)` so all binomial
    /// exponents are positive.
    pub fn normalize(&self, ctx: &FieldCtx) -> Result<Self> {
        let mut out = SimpleRationalTerm {
            coeff: self.coeff,
            t_exp: self.t_exp,
            den: Vec::with_capacity(self.den.len()),
        };
        for &(m, e) in &self.den {
            if m == 0 {
                return Err(Error::ZeroExponentFactor);
            }
            if m > 0 {
                out.den.push((m, e));
            } else {
                // 1/(1 - t^m)^e = (-1)^e t^{-m e} / (1 - t^{-m})^e
                if e.rem_euclid(2) == 1 {
                    out.coeff = ctx.neg(out.coeff);
                }
                out.t_exp += -m * e;
                out.den.push((-m, e));
            }
        }
        Ok(out.canonical())
    }

    /// Value at a field element `t`, if no denominator vanishes.
    pub fn eval(&self, ctx: &FieldCtx, t: Residue) -> Option<Residue> {
        let pow = |e: i64| -> Option<Residue> {
            if e >= 0 {
                Some(ctx.pow(t, e as u64))
            } else {
                ctx.inv(ctx.pow(t, e.unsigned_abs()))
            }
        };
        let mut v = ctx.mul(self.coeff, pow(self.t_exp)?);
        for &(m, e) in &self.den {
            let f = ctx.sub(1, pow(m)?);
            let fe = if e >= 0 {
                ctx.inv(ctx.pow(f, e as u64))?
            } else {
                ctx.pow(f, e.unsigned_abs())
            };
            v = ctx.mul(v, fe);
        }
        Some(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CTResult {
    Scalar(Residue),
    Terms(Vec<SimpleRationalTerm>),
}

impl CTResult {
    pub fn scalar(&self) -> Option<Residue> {
        match self {
            CTResult::Scalar(v) => Some(*v),
            CTResult::Terms(_) => None,
        }
    }

    /// Value at `t`, summing terms when the result is symbolic.
    pub fn eval(&self, ctx: &FieldCtx, t: Residue) -> Option<Residue> {
        match self {
            CTResult::Scalar(v) => Some(*v),
            CTResult::Terms(ts) => ts
                .iter()
                .try_fold(0, |acc, term| Some(ctx.add(acc, term.eval(ctx, t)?))),
        }
    }
}

/// Pole data of `G`: `d1 = |B0| - |B0bar|`, `d0` the order of `L(e^s)` at
/// `s = 0` and `d = d1 - d0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orders {
    pub d0: usize,
    pub d1: i64,
    pub d: i64,
}

/// Exact coefficient `sum l_j a_j^n` (without the `1/n!`).
fn l_moment(l: &[&LTerm], n: usize) -> BigRational {
    l.iter().fold(BigRational::zero(), |acc, t| {
        acc + &t.coeff * num_traits::pow(t.exponent.clone(), n)
    })
}

/// Order of `L(e^s)`, searched over `0..=limit`; `limit + 1` stands for
/// "larger than limit". Computed over the rationals so that a coefficient
/// divisible by `p` is not mistaken for zero.
fn l_order(l: &[&LTerm], limit: usize) -> usize {
    let live: Vec<&LTerm> = l.iter().copied().filter(|t| !t.coeff.is_zero()).collect();
    if live.len() == 1 {
        return 0;
    }
    if live.is_empty() {
        return limit + 1;
    }
    (0..=limit)
        .find(|&n| !l_moment(&live, n).is_zero())
        .unwrap_or(limit + 1)
}

/// Orders of `G`, treating all of `L` as one group.
pub fn orders(problem: &GToddConstantTermProblem) -> Orders {
    let l: Vec<&LTerm> = problem.l.iter().collect();
    let d1 = problem.d1();
    let d0 = l_order(&l, d1.max(0) as usize);
    Orders {
        d0,
        d1,
        d: d1 - d0 as i64,
    }
}

/// `E_n = sum l_j (a_j - shift)^{n + d0} / (n + d0)!` for `n <= d`.
pub fn build_e(
    ctx: &FieldCtx,
    l: &[LTerm],
    d0: usize,
    d: usize,
    shift: &BigRational,
) -> Result<TruncSeries> {
    let top = d0 + d;
    if top as u64 >= ctx.p() {
        return Err(Error::CharTooSmall { p: ctx.p(), d: top });
    }
    let inv_fact = ctx.inverse_factorials(top);
    let mut e = vec![0u64; d + 1];
    for term in l {
        let c = ctx.from_rational(&term.coeff)?;
        if c == 0 {
            continue;
        }
        let a = ctx.from_rational(&(&term.exponent - shift))?;
        let mut pw = ctx.pow(a, d0 as u64);
        for (n, slot) in e.iter_mut().enumerate() {
            *slot = ctx.add(*slot, ctx.mul(c, ctx.mul(pw, inv_fact[n + d0])));
            pw = ctx.mul(pw, a);
        }
    }
    Ok(TruncSeries::new(ctx, e))
}

/// The `s`-free scalar part of `A`: `(-1)^{|B0bar|+|B0|} prod B0bar / prod B0`.
pub fn build_a(ctx: &FieldCtx, b0: &MultiSetZ, b0bar: &MultiSetZ) -> Result<Residue> {
    let den = ctx.from_bigint(&b0.product());
    let Some(den_inv) = ctx.inv(den) else {
        return Err(Error::UnsuitablePrime {
            p: ctx.p(),
            reason: "an element of B0 is divisible by p".into(),
        });
    };
    let mut a = ctx.mul(ctx.from_bigint(&b0bar.product()), den_inv);
    if (b0.len() + b0bar.len()) % 2 == 1 {
        a = ctx.neg(a);
    }
    Ok(a)
}

/// Tuning for [`ct_gtodd_with`].
#[derive(Debug, Clone, Copy)]
pub struct CtOptions {
    /// Use the general `gtodd` path even when `r = 0`.
    pub general_path: bool,
    pub max_vars: usize,
}

impl Default for CtOptions {
    fn default() -> Self {
        CtOptions {
            general_path: false,
            max_vars: 32,
        }
    }
}

/// Exact `(1 - t)^k` factors and numeric values of one pair.
struct PairData {
    net: i64,
    numeric: Option<(Residue, Residue)>,
    monomial: Option<i64>,
}

/// `CT_s G(s)` over `Z_p`.
pub fn ct_gtodd(ctx: &FieldCtx, problem: &GToddConstantTermProblem) -> Result<CTResult> {
    let base = BaseSeries::new(ctx, 0, false)?;
    ct_gtodd_with(&base, problem, CtOptions::default())
}

/// As [`ct_gtodd`], reusing the base series in `base` where long enough.
pub fn ct_gtodd_with(
    base: &BaseSeries,
    problem: &GToddConstantTermProblem,
    opts: CtOptions,
) -> Result<CTResult> {
    let ctx = base.ctx();
    if ctx.p() == 2 {
        return Err(Error::UnsuitablePrime {
            p: 2,
            reason: "the even-series shift needs an odd characteristic".into(),
        });
    }
    let d1 = problem.d1();
    let scalar_a = build_a(ctx, &problem.b0, &problem.b0bar)?;

    let pairs: Vec<PairData> = problem
        .pairs
        .iter()
        .map(|pair| {
            let net = pair.b.len() as i64 - pair.bbar.len() as i64;
            match pair.t {
                TDescriptor::Numeric(t) => {
                    let t = t % ctx.p();
                    let one_minus = ctx.sub(1, t);
                    let inv = ctx.inv(one_minus).ok_or_else(|| Error::UnsuitablePrime {
                        p: ctx.p(),
                        reason: "a numeric t_i is congruent to 1".into(),
                    })?;
                    Ok(PairData {
                        net,
                        numeric: Some((ctx.mul(t, inv), one_minus)),
                        monomial: None,
                    })
                }
                TDescriptor::Monomial(m) => {
                    if m == 0 {
                        return Err(Error::ZeroExponentFactor);
                    }
                    Ok(PairData {
                        net,
                        numeric: None,
                        monomial: Some(m),
                    })
                }
            }
        })
        .collect::<Result<_>>()?;
    let symbolic = pairs.iter().any(|p| p.monomial.is_some())
        || problem.l.iter().any(|t| t.t_exp != 0);

    // group L by its t exponent; each group has its own pole order
    let mut groups: BTreeMap<i64, Vec<&LTerm>> = BTreeMap::new();
    for term in &problem.l {
        groups.entry(term.t_exp).or_default().push(term);
    }
    let limit = d1.max(0) as usize;
    let group_orders: Vec<(i64, Vec<&LTerm>, usize, i64)> = groups
        .into_iter()
        .map(|(te, terms)| {
            let d0 = l_order(&terms, limit);
            (te, terms, d0, d1 - d0 as i64)
        })
        .filter(|g| g.3 >= 0)
        .collect();

    let mut out: BTreeMap<(i64, Vec<(i64, i64)>), Residue> = BTreeMap::new();
    let mut scalar_total: Residue = 0;
    if let Some(dmax) = group_orders.iter().map(|g| g.3 as usize).max() {
        if (d1.max(0) as u64) >= ctx.p() || (dmax as u64 + 1) >= ctx.p() {
            return Err(Error::UnsuitablePrime {
                p: ctx.p(),
                reason: format!("characteristic must exceed {}", d1.max(dmax as i64 + 1)),
            });
        }
        let r = problem.r();
        let use_r0 = r == 0 && !opts.general_path;
        let shift = if use_r0 {
            even_shift(&problem.b0, &problem.b0bar)
        } else {
            BigRational::zero()
        };
        let flen = dmax + 1;
        let f = if use_r0 {
            let f = todd_r0_with(base, &problem.b0, &problem.b0bar, flen)?;
            crate::regseries::RegularSeries::from_series(&f)?
        } else {
            let mut spec = GToddSpec::new(flen);
            spec.b0 = problem.b0.clone();
            spec.b0bar = problem.b0bar.clone();
            spec.pairs = problem
                .pairs
                .iter()
                .map(|p| (p.b.clone(), p.bbar.clone()))
                .collect();
            spec.max_vars = opts.max_vars;
            gtodd_with(base, &spec)?
        };
        let index = f.index();

        for (t_exp, terms, d0, d) in &group_orders {
            let d = *d as usize;
            let owned: Vec<LTerm> = terms.iter().map(|&t| t.clone()).collect();
            let e = build_e(ctx, &owned, *d0, d, &shift)?;
            // P(y) = sum_n E_n F_{d-n}(y), indexed by monomial slot
            let mut poly = vec![0u64; index.count_upto(d)];
            for n in 0..=d {
                let en = e.coeff(n);
                if en == 0 {
                    continue;
                }
                for (slot, &c) in f.coeff_slice(d - n).iter().enumerate() {
                    poly[slot] = ctx.add(poly[slot], ctx.mul(en, c));
                }
            }
            for (slot, &c) in poly.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let mut coeff = ctx.mul(c, scalar_a);
                let mut texp = *t_exp;
                let mut den = Vec::new();
                for (k, pd) in index.exponents(slot).iter().zip(&pairs) {
                    let k = *k as i64;
                    if let Some((y, one_minus)) = pd.numeric {
                        coeff = ctx.mul(coeff, ctx.pow(y, k as u64));
                        // (1 - t)^{-net}
                        let w = if pd.net >= 0 {
                            ctx.inv(ctx.pow(one_minus, pd.net as u64)).expect("t != 1")
                        } else {
                            ctx.pow(one_minus, pd.net.unsigned_abs())
                        };
                        coeff = ctx.mul(coeff, w);
                    } else if let Some(m) = pd.monomial {
                        texp += m * k;
                        den.push((m, k + pd.net));
                    }
                }
                if symbolic {
                    let key = SimpleRationalTerm {
                        coeff: 0,
                        t_exp: texp,
                        den,
                    }
                    .canonical();
                    let slot = out.entry((key.t_exp, key.den)).or_insert(0);
                    *slot = ctx.add(*slot, coeff);
                } else {
                    scalar_total = ctx.add(scalar_total, coeff);
                }
            }
        }
    }

    if !symbolic {
        return Ok(CTResult::Scalar(scalar_total));
    }
    let terms = out
        .into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|((t_exp, den), coeff)| SimpleRationalTerm { coeff, t_exp, den })
        .collect();
    Ok(CTResult::Terms(terms))
}

/// Exact rational `CT_s G(s)` by multi-prime reconstruction, for problems
/// with numeric data only.
pub fn ct_gtodd_rational(problem: &GToddConstantTermProblem, primes: &[u64]) -> Result<Option<BigRational>> {
    let mut residues = Vec::with_capacity(primes.len());
    for &p in primes {
        let ctx = crate::modfield::make_field(p)?;
        match ct_gtodd(&ctx, problem)? {
            CTResult::Scalar(v) => residues.push((v, p)),
            CTResult::Terms(_) => {
                return Err(Error::Invalid(
                    "rational reconstruction needs a numeric problem".into(),
                ))
            }
        }
    }
    crate::modfield::crt_rational(&residues)
}
