//! Counting with short sums: pick a generic direction `γ`, substitute
//! `z = e^{sγ}` in every term, take constant terms with CTGTodd and add up.

pub mod ratfunc;
pub mod shortsum;

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ctgtodd::{
    ct_gtodd_with, CTPair, CTResult, CtOptions, GToddConstantTermProblem, LTerm, SimpleRationalTerm, TDescriptor,
};
use crate::error::{Error, Result};
use crate::modfield::{make_field, FieldCtx, Residue};
use crate::toddgen::{BaseSeries, MultiSetZ};

pub use ratfunc::{combine_rational, RationalFunctionQ, RationalFunctionT, DEFAULT_DEGREE_CAP};
pub use shortsum::{parse_shortsum, DenFactor, NumMonomial, ShortSum, ShortSumTerm};

/// Draws before giving up on finding a valid `γ`.
pub const GAMMA_ATTEMPTS: usize = 20;

/// Seed used when the caller does not choose one.
pub const DEFAULT_SEED: u64 = 0x5eed_7add;

/// A substitution direction with entries in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaVector {
    pub entries: Vec<i64>,
    pub seed: u64,
    /// 0-based draw at which this vector was accepted.
    pub attempt: usize,
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

fn dot_i64(a: &[i64], b: &[i64]) -> Result<i64> {
    i64::try_from(dot(a, b)).map_err(|_| Error::ResourceCap("γ-exponent exceeds 64 bits".into()))
}

/// Checks that `⟨γ, β⟩ ≢ 0 (mod p)` for every denominator factor without `t`.
pub fn check_gamma(ss: &ShortSum, ctx: &FieldCtx, gamma: &[i64]) -> Result<()> {
    for (i, term) in ss.terms.iter().enumerate() {
        for (j, fac) in term.den.iter().enumerate() {
            if fac.t == 0 && ctx.from_i128(dot(gamma, &fac.z)) == 0 {
                return Err(Error::InvalidGamma { term: i, factor: j });
            }
        }
    }
    Ok(())
}

/// Draws `γ` uniformly from `[0, p)^n` until it is valid for `ss`.
pub fn pick_gamma(ss: &ShortSum, ctx: &FieldCtx, seed: u64) -> Result<GammaVector> {
    pick_gamma_attempts(ss, ctx, seed, GAMMA_ATTEMPTS)
}

pub fn pick_gamma_attempts(ss: &ShortSum, ctx: &FieldCtx, seed: u64, attempts: usize) -> Result<GammaVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..attempts {
        let entries: Vec<i64> = (0..ss.z_vars).map(|_| rng.gen_range(0..ctx.p()) as i64).collect();
        if check_gamma(ss, ctx, &entries).is_ok() {
            return Ok(GammaVector { entries, seed, attempt });
        }
    }
    Err(Error::NoValidGamma { attempts })
}

/// The constant-term problem of one term after `z = e^{sγ}`.
pub fn term_problem(term: &ShortSumTerm, gamma: &[i64]) -> Result<GToddConstantTermProblem> {
    let mut b0 = Vec::new();
    let mut by_t: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for fac in &term.den {
        let b = dot_i64(gamma, &fac.z)?;
        if fac.t == 0 {
            b0.push(b);
        } else {
            by_t.entry(fac.t).or_default().push(b);
        }
    }
    let l = term
        .num
        .iter()
        .map(|m| {
            Ok(LTerm {
                coeff: BigRational::from_integer(m.c.into()),
                exponent: BigRational::from_integer(dot_i64(gamma, &m.z)?.into()),
                t_exp: m.t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GToddConstantTermProblem {
        l,
        b0: MultiSetZ::new(b0).map_err(|_| Error::Invalid("γ is orthogonal to a denominator factor".into()))?,
        b0bar: MultiSetZ::empty(),
        pairs: by_t
            .into_iter()
            .map(|(t, bs)| CTPair {
                b: MultiSetZ::with_zeros(bs),
                bbar: MultiSetZ::empty(),
                t: TDescriptor::Monomial(t),
            })
            .collect(),
    })
}

/// Builds one problem per distinct specialized denominator; terms with the
/// same denominator have their numerators concatenated.
pub fn term_problems(ss: &ShortSum, gamma: &[i64]) -> Result<Vec<GToddConstantTermProblem>> {
    type Key = (Vec<i64>, Vec<(i64, Vec<i64>)>);
    let mut merged: BTreeMap<Key, GToddConstantTermProblem> = BTreeMap::new();
    for term in &ss.terms {
        let prob = term_problem(term, gamma)?;
        let mut b0 = prob.b0.elements().to_vec();
        b0.sort_unstable();
        let pairs = prob
            .pairs
            .iter()
            .map(|p| {
                let mut bs = p.b.elements().to_vec();
                bs.sort_unstable();
                let TDescriptor::Monomial(t) = p.t else { unreachable!() };
                (t, bs)
            })
            .collect();
        match merged.entry((b0, pairs)) {
            std::collections::btree_map::Entry::Occupied(mut e) => e.get_mut().l.extend(prob.l),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(prob);
            }
        }
    }
    Ok(merged.into_values().collect())
}

/// Sum of constant terms over all terms of `ss`: a scalar when `t_vars = 0`,
/// otherwise a list of simple rational terms in `t` with merged duplicates.
pub fn solve_basic(ss: &ShortSum, ctx: &FieldCtx, gamma: &[i64]) -> Result<CTResult> {
    check_gamma(ss, ctx, gamma)?;
    let problems = term_problems(ss, gamma)?;
    let base = BaseSeries::new(ctx, ss.max_factors() + 2, ss.t_vars > 0)?;
    let results = problems
        .par_iter()
        .map(|prob| ct_gtodd_with(&base, prob, CtOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    let mut scalar: Residue = 0;
    let mut acc: BTreeMap<(i64, Vec<(i64, i64)>), Residue> = BTreeMap::new();
    for res in results {
        match res {
            CTResult::Scalar(v) => scalar = ctx.add(scalar, v),
            CTResult::Terms(ts) => {
                for t in ts {
                    let slot = acc.entry((t.t_exp, t.den)).or_insert(0);
                    *slot = ctx.add(*slot, t.coeff);
                }
            }
        }
    }
    if ss.t_vars == 0 {
        debug_assert!(acc.is_empty());
        return Ok(CTResult::Scalar(scalar));
    }
    if scalar != 0 {
        let slot = acc.entry((0, Vec::new())).or_insert(0);
        *slot = ctx.add(*slot, scalar);
    }
    Ok(CTResult::Terms(
        acc.into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|((t_exp, den), coeff)| SimpleRationalTerm { coeff, t_exp, den })
            .collect(),
    ))
}

/// The short sum as one reduced rational function in `t` over `Z_p`.
pub fn ehrhart_series(ss: &ShortSum, ctx: &FieldCtx, seed: u64) -> Result<RationalFunctionT> {
    let gamma = pick_gamma(ss, ctx, seed)?;
    match solve_basic(ss, ctx, &gamma.entries)? {
        CTResult::Scalar(v) => Ok(RationalFunctionT::reduced(ctx, vec![v], vec![1])),
        CTResult::Terms(ts) => combine_rational(ctx, &ts, DEFAULT_DEGREE_CAP),
    }
}

/// Rational-coefficient version of [`ehrhart_series`] from several primes.
pub fn ehrhart_series_multi(ss: &ShortSum, primes: &[u64], seed: u64) -> Result<RationalFunctionQ> {
    let images = primes
        .iter()
        .map(|&p| ehrhart_series(ss, &make_field(p)?, seed))
        .collect::<Result<Vec<_>>>()?;
    RationalFunctionQ::from_images(&images)
}
