//! Integer optimization by locating the lowest nonzero coefficient of a
//! cost-specialized lattice-point generating function.
//!
//! For a short sum `f(P; y) = sum_{x in P} y^x`, substituting
//! `y_k -> y_k t^{c_k}` and taking the constant term in the `y` direction
//! gives `g(t) = sum_{x in P} t^{c.x}`, a sum of terms
//! `eps t^a / prod (1 - t^b)` with `b > 0`. With `m` the least `a`,
//! `G(t) = t^{-m} g(t)` is a power series with nonnegative integer
//! coefficients and `min(c, P) = m + ord G`. The order is found by a
//! truncated probe, then by doubling and bisection on prefix sums
//! `G^k = G_0 + ... + G_k`, evaluated under several primes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ctgtodd::{CTResult, SimpleRationalTerm};
use crate::error::{Error, Result};
use crate::modfield::{crt_reconstruct_centered, make_field, poly_mul, FieldCtx, Residue};
use crate::mpa::{pick_gamma, solve_basic, DenFactor, NumMonomial, ShortSum, ShortSumTerm};
use crate::series::TruncSeries;

/// Default probe length.
pub const DEFAULT_K0: usize = 1 << 16;

/// Largest prefix index searched when no bound on the optimum is known.
pub const MAX_SEARCH_INDEX: i64 = 1 << 27;

/// Node budget of [`brute_knapsack`].
pub const BRUTE_LIMIT: usize = 10_000_000;

/// Terms produced by [`knapsack_shortsum`] before giving up.
pub const GENERATOR_TERM_LIMIT: usize = 2_000_000;

/// Enumeration nodes [`knapsack_shortsum`] may visit, estimated up front.
pub const GENERATOR_NODE_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Max,
    Min,
}

/// `g(t)` over one prime, as normalized terms `coeff t^a / prod (1 - t^b)^e`
/// with every `b > 0`.
#[derive(Debug, Clone)]
pub struct CostSpecializedSum {
    pub ctx: FieldCtx,
    pub terms: Vec<SimpleRationalTerm>,
}

impl CostSpecializedSum {
    pub fn new(ctx: &FieldCtx, terms: Vec<SimpleRationalTerm>) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|t| normalize_term(ctx, t))
            .filter(|t| !matches!(t, Ok(t) if t.coeff == 0))
            .collect::<Result<Vec<_>>>()?;
        Ok(CostSpecializedSum {
            ctx: ctx.clone(),
            terms,
        })
    }
}

/// Rewrites `1/(1 - t^{-b})` as `-t^b/(1 - t^b)` in every factor.
pub fn normalize_term(ctx: &FieldCtx, term: &SimpleRationalTerm) -> Result<SimpleRationalTerm> {
    term.normalize(ctx)
}

/// The short sum after `y_k -> y_k t^{c_k}`.
pub fn cost_shortsum(ss: &ShortSum, c: &[i64]) -> Result<ShortSum> {
    if ss.t_vars != 0 {
        return Err(Error::Invalid("cost specialization needs a sum without t".into()));
    }
    if c.len() != ss.z_vars {
        return Err(Error::Invalid(format!(
            "cost vector has {} entries, the sum has {} variables",
            c.len(),
            ss.z_vars
        )));
    }
    let dot = |z: &[i64]| -> Result<i64> {
        let v: i128 = z.iter().zip(c).map(|(&a, &b)| a as i128 * b as i128).sum();
        i64::try_from(v).map_err(|_| Error::ResourceCap("cost value exceeds 64 bits".into()))
    };
    let mut out = ShortSum::new(1, ss.z_vars);
    for term in &ss.terms {
        out.terms.push(ShortSumTerm {
            num: term
                .num
                .iter()
                .map(|m| Ok(NumMonomial { c: m.c, t: dot(&m.z)?, z: m.z.clone() }))
                .collect::<Result<_>>()?,
            den: term
                .den
                .iter()
                .map(|f| Ok(DenFactor { t: dot(&f.z)?, z: f.z.clone() }))
                .collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

/// `g(P; 1, t)` over `Z_p` for the cost vector `c`.
pub fn specialize_cost(ss: &ShortSum, c: &[i64], ctx: &FieldCtx, seed: u64) -> Result<CostSpecializedSum> {
    let sst = cost_shortsum(ss, c)?;
    let gamma = pick_gamma(&sst, ctx, seed)?;
    match solve_basic(&sst, ctx, &gamma.entries)? {
        CTResult::Terms(ts) => CostSpecializedSum::new(ctx, ts),
        CTResult::Scalar(_) => unreachable!("sums with t_vars = 1 give terms"),
    }
}

/// Least `a` over all terms: a lower bound for the order of `g`.
pub fn min_order(sum: &CostSpecializedSum) -> Result<i64> {
    sum.terms.iter().map(|t| t.t_exp).min().ok_or(Error::EmptySum)
}

/// Coefficients `0..len` of `prod (1 - t^b)^{-e}`, optionally times
/// `1/(1 - t)`. Small cases use in-place recurrences, large ones one
/// fast inverse.
fn reciprocal_table(ctx: &FieldCtx, den: &[(i64, i64)], len: usize, prefix: bool) -> Result<Vec<Residue>> {
    let mut factors: Vec<(usize, i64)> = den.iter().map(|&(b, e)| (b as usize, e)).collect();
    if prefix {
        factors.push((1, 1));
    }
    let weight: i64 = factors.iter().map(|f| f.1.abs()).sum();
    let mut out = vec![0u64; len];
    if len == 0 {
        return Ok(out);
    }
    out[0] = 1;
    let divide_in_place = |out: &mut Vec<u64>, b: usize| {
        for i in b..len {
            out[i] = ctx.add(out[i], out[i - b]);
        }
    };
    let multiply_in_place = |out: &mut Vec<u64>, b: usize| {
        for i in (b..len).rev() {
            out[i] = ctx.sub(out[i], out[i - b]);
        }
    };
    if len < 100_000 || weight <= 24 {
        for &(b, e) in &factors {
            for _ in 0..e.abs() {
                if e > 0 {
                    divide_in_place(&mut out, b);
                } else {
                    multiply_in_place(&mut out, b);
                }
            }
        }
        return Ok(out);
    }
    let mut prod = out.clone();
    for &(b, e) in &factors {
        for _ in 0..e.abs() {
            if e > 0 {
                multiply_in_place(&mut prod, b);
            } else {
                divide_in_place(&mut prod, b);
            }
        }
    }
    Ok(TruncSeries::new(ctx, prod).inv()?.into_coeffs())
}

fn by_pattern(sum: &CostSpecializedSum, m: i64) -> BTreeMap<&[(i64, i64)], Vec<(i64, Residue)>> {
    let mut groups: BTreeMap<&[(i64, i64)], Vec<(i64, Residue)>> = BTreeMap::new();
    for t in &sum.terms {
        groups.entry(&t.den).or_default().push((t.t_exp - m, t.coeff));
    }
    groups
}

/// `G(t) = t^{-m} g(t)` modulo `t^len`.
pub fn shifted_series(sum: &CostSpecializedSum, m: i64, len: usize) -> Result<Vec<Residue>> {
    let ctx = &sum.ctx;
    let mut total = vec![0u64; len];
    for (den, shifts) in by_pattern(sum, m) {
        let mut num = vec![0u64; len];
        let mut any = false;
        for &(s, c) in &shifts {
            if s < 0 {
                return Err(Error::Invalid(format!("shift below the minimum order by {}", -s)));
            }
            if (s as u64) < len as u64 {
                num[s as usize] = ctx.add(num[s as usize], c);
                any = true;
            }
        }
        if !any {
            continue;
        }
        let table = reciprocal_table(ctx, den, len, false)?;
        let part = poly_mul(ctx, &num, &table, len);
        for (a, b) in total.iter_mut().zip(&part) {
            *a = ctx.add(*a, *b);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    Found(usize),
    AllZero,
}

/// Least index below `k0` where `G` has a nonzero coefficient under some
/// prime.
pub fn series_probe(sums: &[CostSpecializedSum], m: i64, k0: usize) -> Result<Probe> {
    let mut best: Option<usize> = None;
    for sum in sums {
        let g = shifted_series(sum, m, k0)?;
        if let Some(i) = g.iter().position(|&c| c != 0) {
            best = Some(best.map_or(i, |b| b.min(i)));
        }
    }
    Ok(best.map_or(Probe::AllZero, Probe::Found))
}

/// `G^k = sum_{i <= k} G_i` modulo the prime of `sum`.
pub fn prefix_count(sum: &CostSpecializedSum, m: i64, k: i64) -> Result<Residue> {
    if k < 0 {
        return Ok(0);
    }
    let ctx = &sum.ctx;
    let mut total = 0u64;
    for (den, shifts) in by_pattern(sum, m) {
        let need = shifts.iter().map(|&(s, _)| k - s).max().unwrap_or(-1);
        if need < 0 {
            continue;
        }
        let table = reciprocal_table(ctx, den, need as usize + 1, true)?;
        for &(s, c) in &shifts {
            let at = k - s;
            if at >= 0 {
                total = ctx.add(total, ctx.mul(c, table[at as usize]));
            }
        }
    }
    Ok(total)
}

/// Tuning for [`bsct_min`].
#[derive(Debug, Clone, Copy)]
pub struct BsctOptions {
    pub k0: usize,
    /// Decide zero-ness of prefix counts from their CRT lift instead of
    /// per-prime residues; also checks that the lift is nonnegative.
    pub exact: bool,
    /// Skip the truncated probe and go straight to doubling.
    pub skip_probe: bool,
    pub seed: u64,
}

impl Default for BsctOptions {
    fn default() -> Self {
        BsctOptions {
            k0: DEFAULT_K0,
            exact: false,
            skip_probe: false,
            seed: crate::mpa::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsctReport {
    /// The optimum, or `None` when the generating function is empty.
    pub value: Option<i64>,
    pub m: i64,
    pub via_probe: bool,
    pub doublings: usize,
    pub prefix_evals: usize,
}

fn prefix_nonzero(sums: &[CostSpecializedSum], m: i64, k: i64, exact: bool) -> Result<bool> {
    let residues = sums
        .iter()
        .map(|s| Ok((prefix_count(s, m, k)?, s.ctx.p())))
        .collect::<Result<Vec<_>>>()?;
    if !exact {
        return Ok(residues.iter().any(|&(r, _)| r != 0));
    }
    let lifted = crt_reconstruct_centered(&residues)?;
    if lifted.is_negative() {
        return Err(Error::Invalid(format!(
            "prefix count at {k} lifts to {lifted}; the primes are too small for exact mode"
        )));
    }
    Ok(!lifted.is_zero())
}

/// `min(c, P)` from the specialized sums (one per prime). `value_bound`
/// is any number known to be at least the minimum (for instance the
/// relaxation's maximum); the search stops with `Unbounded` past it.
pub fn bsct_min(sums: &[CostSpecializedSum], value_bound: Option<i64>, opts: &BsctOptions) -> Result<BsctReport> {
    if sums.is_empty() {
        return Err(Error::Invalid("at least one prime is needed".into()));
    }
    let m = match sums.iter().filter_map(|s| min_order(s).ok()).min() {
        Some(m) => m,
        None => {
            return Ok(BsctReport {
                value: None,
                m: 0,
                via_probe: false,
                doublings: 0,
                prefix_evals: 0,
            })
        }
    };
    let limit = match value_bound {
        Some(ub) if ub < m => return Err(Error::Unbounded { bound: ub }),
        Some(ub) => ub - m,
        None => MAX_SEARCH_INDEX,
    };
    let bound_value = m + limit;
    let mut report = BsctReport {
        value: None,
        m,
        via_probe: false,
        doublings: 0,
        prefix_evals: 0,
    };
    let k0 = opts.k0.max(1) as i64;
    // prefix(lo) is known to vanish
    let mut lo: i64 = -1;
    if !opts.skip_probe {
        let len = k0.min(limit + 1) as usize;
        if let Probe::Found(i) = series_probe(sums, m, len)? {
            report.value = Some(m + i as i64);
            report.via_probe = true;
            return Ok(report);
        }
        lo = len as i64 - 1;
        if lo >= limit {
            return Err(Error::Unbounded { bound: bound_value });
        }
    }
    let mut step = k0;
    let hi = loop {
        while lo + 1 >= step {
            step *= 2;
        }
        let cand = (step - 1).min(limit);
        report.prefix_evals += 1;
        if prefix_nonzero(sums, m, cand, opts.exact)? {
            break cand;
        }
        report.doublings += 1;
        lo = cand;
        if cand >= limit {
            return Err(Error::Unbounded { bound: bound_value });
        }
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        report.prefix_evals += 1;
        if prefix_nonzero(sums, m, mid, opts.exact)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.value = Some(m + hi);
    Ok(report)
}

/// Optimizes `c.x` over the points encoded by the short sum `ss`
/// (a sum in `y` without `t`). `value_bound` bounds the optimum from the
/// unfavourable side: at least the minimum in `Min` mode, at most the
/// maximum in `Max` mode.
pub fn bsct_solve(
    ss: &ShortSum,
    c: &[i64],
    primes: &[u64],
    mode: Mode,
    value_bound: Option<i64>,
    opts: &BsctOptions,
) -> Result<BsctReport> {
    let cost: Vec<i64> = match mode {
        Mode::Min => c.to_vec(),
        Mode::Max => c.iter().map(|&v| -v).collect(),
    };
    let sums = primes
        .iter()
        .map(|&p| specialize_cost(ss, &cost, &make_field(p)?, opts.seed))
        .collect::<Result<Vec<_>>>()?;
    let bound = match mode {
        Mode::Min => value_bound,
        Mode::Max => value_bound.map(|v| -v),
    };
    let mut report = bsct_min(&sums, bound, opts).map_err(|e| match (e, mode) {
        (Error::Unbounded { bound }, Mode::Max) => Error::Unbounded { bound: -bound },
        (e, _) => e,
    })?;
    if mode == Mode::Max {
        report.value = report.value.map(|v| -v);
        report.m = -report.m;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Le,
}

/// `a.x = b` (or `<= b`) over `x in N^n`, objective `c.x`. All `a_i > 0`
/// keeps the region bounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ILPInstance {
    pub a: Vec<i64>,
    pub b: i64,
    #[serde(default)]
    pub c: Vec<i64>,
    pub relation: Relation,
}

impl ILPInstance {
    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(Error::Invalid("empty coefficient row".into()));
        }
        if self.a.iter().any(|&v| v <= 0) {
            return Err(Error::Invalid("coefficients must be positive".into()));
        }
        if self.b < 0 {
            return Err(Error::Invalid("right-hand side must be nonnegative".into()));
        }
        if self.c.len() != self.a.len() {
            return Err(Error::Invalid(format!(
                "cost vector has {} entries, the row has {}",
                self.c.len(),
                self.a.len()
            )));
        }
        Ok(())
    }

    /// Cost vector convention for the bundled benchmark knapsacks: the first
    /// `n` entries of a fixed vector.
    pub fn benchmark_cost(n: usize) -> Vec<i64> {
        const COST: [i64; 10] = [213, -1928, -11111, -2345, 9123, -12834, -123, 122331, 0, 0];
        COST[..n.min(10)].to_vec()
    }
}

/// Minimum and maximum of `c.x` over the continuous relaxation, by
/// enumerating its vertices. `None` when the relaxation is empty.
pub fn lp_range(inst: &ILPInstance, c: &[i64]) -> Option<(BigRational, BigRational)> {
    let mut values: Vec<BigRational> = Vec::new();
    if inst.relation == Relation::Le && inst.b >= 0 {
        values.push(BigRational::zero());
    }
    for (i, &ai) in inst.a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let xi = BigRational::new(inst.b.into(), ai.into());
        if xi.is_negative() {
            continue;
        }
        values.push(xi * BigRational::from_integer(c[i].into()));
    }
    let lo = values.iter().min()?.clone();
    let hi = values.iter().max()?.clone();
    Some((lo, hi))
}

/// Exhaustive dynamic program over right-hand sides `0..=b`. Returns the
/// optimum and one optimal point, or `None` when infeasible.
pub fn brute_knapsack(inst: &ILPInstance, mode: Mode) -> Result<Option<(i64, Vec<i64>)>> {
    inst.validate()?;
    let n = inst.a.len();
    let nodes = n.saturating_mul(inst.b as usize + 1);
    if nodes > BRUTE_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            nodes: nodes as u64,
            limit: BRUTE_LIMIT as u64,
        });
    }
    let sign = if mode == Mode::Max { 1 } else { -1 };
    let b = inst.b as usize;
    // best[r]: largest sign*c.x with a.x = r; choice[r]: last item used
    let mut best: Vec<Option<i64>> = vec![None; b + 1];
    let mut choice = vec![usize::MAX; b + 1];
    best[0] = Some(0);
    for r in 1..=b {
        for i in 0..n {
            let ai = inst.a[i] as usize;
            if ai > r {
                continue;
            }
            if let Some(prev) = best[r - ai] {
                let v = prev + sign * inst.c[i];
                if best[r].is_none_or(|cur| v > cur) {
                    best[r] = Some(v);
                    choice[r] = i;
                }
            }
        }
    }
    let target = match inst.relation {
        Relation::Eq => best[b].map(|v| (v, b)),
        Relation::Le => (0..=b).filter_map(|r| best[r].map(|v| (v, r))).max_by_key(|&(v, r)| (v, std::cmp::Reverse(r))),
    };
    let Some((v, mut r)) = target else { return Ok(None) };
    let mut x = vec![0i64; n];
    while r > 0 {
        let i = choice[r];
        x[i] += 1;
        r -= inst.a[i] as usize;
    }
    Ok(Some((sign * v, x)))
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = (a as i128).extended_gcd(&(b as i128));
    (e.gcd as i64, e.x as i64, e.y as i64)
}

/// Short sum of `sum_{x feasible} y^x` built row by row: all but the last
/// one or two coordinates are enumerated, and the remaining solutions form
/// an arithmetic progression `y^{p0} (1 - y^{N w}) / (1 - y^w)`. With
/// `wrap`, each term is further multiplied by `(1 - y^v)/(1 - y^v)` for a
/// small random direction `v`, which changes the denominators but not the
/// function.
pub fn knapsack_shortsum<R: Rng>(inst: &ILPInstance, rng: &mut R, wrap: bool) -> Result<ShortSum> {
    let n = inst.a.len();
    if n == 0 || inst.a.iter().any(|&v| v <= 0) || inst.b < 0 {
        return Err(Error::Invalid("knapsack needs positive coefficients and b >= 0".into()));
    }
    let free = match inst.relation {
        Relation::Eq => n.saturating_sub(2),
        Relation::Le => n - 1,
    };
    let nodes: f64 = inst.a[..free].iter().map(|&a| (inst.b / a + 1) as f64).product();
    if nodes > GENERATOR_NODE_LIMIT as f64 {
        return Err(Error::SearchSpaceTooLarge {
            nodes: nodes.min(u64::MAX as f64) as u64,
            limit: GENERATOR_NODE_LIMIT,
        });
    }
    let pool: Vec<Vec<i64>> = (0..2)
        .map(|_| loop {
            let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            if v.iter().any(|&e| e != 0) {
                break v;
            }
        })
        .collect();
    let mut ss = ShortSum::new(0, n);
    let mut prefix = vec![0i64; n];
    // depth-first enumeration of the free coordinates
    fn rec(
        inst: &ILPInstance,
        free: usize,
        depth: usize,
        rem: i64,
        prefix: &mut Vec<i64>,
        out: &mut Vec<ShortSumTerm>,
    ) -> Result<()> {
        if depth == free {
            if let Some(t) = tail_term(inst, free, rem, prefix) {
                if out.len() >= GENERATOR_TERM_LIMIT {
                    return Err(Error::ResourceCap(format!(
                        "more than {GENERATOR_TERM_LIMIT} generator terms"
                    )));
                }
                out.push(t);
            }
            return Ok(());
        }
        let a = inst.a[depth];
        let mut x = 0;
        while x * a <= rem {
            prefix[depth] = x;
            rec(inst, free, depth + 1, rem - x * a, prefix, out)?;
            x += 1;
        }
        prefix[depth] = 0;
        Ok(())
    }
    let mut terms = Vec::new();
    rec(inst, free, 0, inst.b, &mut prefix, &mut terms)?;
    if wrap {
        for t in terms.iter_mut() {
            if let Some(v) = pool.choose(rng).filter(|_| rng.gen_bool(0.7)) {
                let shifted: Vec<NumMonomial> = t
                    .num
                    .iter()
                    .map(|m| NumMonomial {
                        c: -m.c,
                        t: 0,
                        z: m.z.iter().zip(v).map(|(a, b)| a + b).collect(),
                    })
                    .collect();
                t.num.extend(shifted);
                t.den.push(DenFactor { t: 0, z: v.clone() });
            }
        }
    }
    ss.terms = terms;
    Ok(ss)
}

fn tail_term(inst: &ILPInstance, free: usize, rem: i64, prefix: &[i64]) -> Option<ShortSumTerm> {
    let n = inst.a.len();
    let mono = |z: Vec<i64>, c: i64| NumMonomial { c, t: 0, z };
    match (inst.relation, n - free) {
        (Relation::Eq, 1) => {
            let a = inst.a[n - 1];
            (rem % a == 0).then(|| {
                let mut z = prefix.to_vec();
                z[n - 1] = rem / a;
                ShortSumTerm {
                    num: vec![mono(z, 1)],
                    den: vec![],
                }
            })
        }
        (Relation::Eq, _) => {
            // a x + a2 y = rem, x, y >= 0
            let (a, a2) = (inst.a[n - 2], inst.a[n - 1]);
            let (g, u, _) = ext_gcd(a, a2);
            if rem % g != 0 {
                return None;
            }
            let (aa, bb, r) = (a / g, a2 / g, rem / g);
            // x = r * aa^{-1} mod bb
            let inv = u.rem_euclid(bb.max(1));
            let x_min = ((r as i128 * inv as i128).rem_euclid(bb.max(1) as i128)) as i64;
            let x_max = r / aa;
            if x_min > x_max {
                return None;
            }
            let count = (x_max - x_min) / bb + 1;
            let mut p0 = prefix.to_vec();
            p0[n - 2] = x_min;
            p0[n - 1] = (r - aa * x_min) / bb;
            let mut w = vec![0i64; n];
            w[n - 2] = bb;
            w[n - 1] = -aa;
            let end: Vec<i64> = p0.iter().zip(&w).map(|(p, d)| p + count * d).collect();
            Some(ShortSumTerm {
                num: vec![mono(p0, 1), mono(end, -1)],
                den: vec![DenFactor { t: 0, z: w }],
            })
        }
        (Relation::Le, _) => {
            let a = inst.a[n - 1];
            let count = rem / a + 1;
            let p0 = prefix.to_vec();
            let mut end = p0.clone();
            end[n - 1] = count;
            let mut w = vec![0i64; n];
            w[n - 1] = 1;
            Some(ShortSumTerm {
                num: vec![mono(p0, 1), mono(end, -1)],
                den: vec![DenFactor { t: 0, z: w }],
            })
        }
    }
}

/// Floor of the relaxation bound on the unfavourable side of `mode`.
pub fn lp_value_bound(inst: &ILPInstance, mode: Mode) -> Option<i64> {
    let (lo, hi) = lp_range(inst, &inst.c)?;
    let v = match mode {
        Mode::Min => hi.floor(),
        Mode::Max => lo.ceil(),
    };
    v.to_integer().to_i64()
}

/// Generates a short sum for a small knapsack and runs [`bsct_solve`] with
/// the relaxation bound.
pub fn solve_instance<R: Rng>(
    inst: &ILPInstance,
    primes: &[u64],
    mode: Mode,
    opts: &BsctOptions,
    rng: &mut R,
) -> Result<BsctReport> {
    inst.validate()?;
    let ss = knapsack_shortsum(inst, rng, true)?;
    bsct_solve(&ss, &inst.c, primes, mode, lp_value_bound(inst, mode), opts)
}

/// Exact `sum_{x} t^{c.x}` histogram of a short sum at `y = 1`, by CRT of
/// the shifted series over the given primes: `(m, coefficients)`.
pub fn value_histogram(ss: &ShortSum, c: &[i64], primes: &[u64], len: usize, seed: u64) -> Result<(i64, Vec<BigInt>)> {
    let sums = primes
        .iter()
        .map(|&p| specialize_cost(ss, c, &make_field(p)?, seed))
        .collect::<Result<Vec<_>>>()?;
    let m = sums.iter().filter_map(|s| min_order(s).ok()).min().ok_or(Error::EmptySum)?;
    let series = sums
        .iter()
        .map(|s| shifted_series(s, m, len))
        .collect::<Result<Vec<_>>>()?;
    let coeffs = (0..len)
        .map(|i| {
            let res: Vec<(u64, u64)> = series.iter().zip(primes).map(|(s, &p)| (s[i], p)).collect();
            crt_reconstruct_centered(&res)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((m, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::series::coeff_reciprocal_prefix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PRIMES: [u64; 2] = [998_244_353, 1_004_535_809];

    fn ctx() -> FieldCtx {
        make_field(PRIMES[0]).unwrap()
    }

    fn term(coeff: u64, t_exp: i64, den: &[(i64, i64)]) -> SimpleRationalTerm {
        SimpleRationalTerm {
            coeff,
            t_exp,
            den: den.to_vec(),
        }
    }

    fn knap(a: &[i64], b: i64, c: &[i64], relation: Relation) -> ILPInstance {
        ILPInstance {
            a: a.to_vec(),
            b,
            c: c.to_vec(),
            relation,
        }
    }

    #[test]
    fn normal_form() {
        let ctx = ctx();
        let t = normalize_term(&ctx, &term(1, 0, &[(-2, 1)])).unwrap();
        assert_eq!(t, term(ctx.neg(1), 2, &[(2, 1)]));
        let same = term(3, 1, &[(1, 2), (4, 1)]);
        assert_eq!(normalize_term(&ctx, &same).unwrap(), same);
        // flipping back by hand restores the original
        let back = term(ctx.neg(t.coeff), t.t_exp - 2, &[(-2, 1)]);
        assert_eq!(normalize_term(&ctx, &back).unwrap(), t);
        assert!(matches!(
            normalize_term(&ctx, &term(1, 0, &[(0, 1)])),
            Err(Error::ZeroExponentFactor)
        ));
    }

    #[test]
    fn min_order_examples() {
        let ctx = ctx();
        let one = CostSpecializedSum::new(&ctx, vec![term(1, 3, &[(1, 1)])]).unwrap();
        assert_eq!(min_order(&one).unwrap(), 3);
        let three = CostSpecializedSum::new(&ctx, vec![term(1, -2, &[]), term(1, 0, &[]), term(1, 5, &[])]).unwrap();
        assert_eq!(min_order(&three).unwrap(), -2);
        let empty = CostSpecializedSum::new(&ctx, vec![]).unwrap();
        assert!(matches!(min_order(&empty), Err(Error::EmptySum)));
    }

    #[test]
    fn unit_square_specialization() {
        let ctx = ctx();
        let ss = fixtures::unit_square_qn(1);
        let s = specialize_cost(&ss, &[1, 1], &ctx, 3).unwrap();
        let m = min_order(&s).unwrap();
        let g = shifted_series(&s, m, 6 - m as usize).unwrap();
        // 1 + 2t + t^2 shifted by -m
        let mut want = vec![0u64; g.len()];
        want[(-m) as usize] = 1;
        want[(1 - m) as usize] = 2;
        want[(2 - m) as usize] = 1;
        assert_eq!(g, want);
        assert_eq!(series_probe(&[s.clone()], m, 16).unwrap(), Probe::Found((-m) as usize));

        let z = specialize_cost(&ss, &[0, 0], &ctx, 3).unwrap();
        assert_eq!(z.terms.len(), 1);
        assert_eq!((z.terms[0].t_exp, z.terms[0].coeff), (0, 4));

        let opts = BsctOptions::default();
        let max = bsct_solve(&ss, &[1, 1], &PRIMES, Mode::Max, None, &opts).unwrap();
        let min = bsct_solve(&ss, &[1, 1], &PRIMES, Mode::Min, None, &opts).unwrap();
        assert_eq!((max.value, min.value), (Some(2), Some(0)));
    }

    #[test]
    fn probe_and_prefix_examples() {
        let ctx = ctx();
        let cancel = CostSpecializedSum::new(&ctx, vec![term(1, 1, &[(1, 1)]), term(ctx.neg(1), 1, &[(1, 1)])]).unwrap();
        assert!(cancel.terms.is_empty() || series_probe(&[cancel.clone()], 0, 64).unwrap() == Probe::AllZero);
        let geo = CostSpecializedSum::new(&ctx, vec![term(1, 0, &[(1, 1)])]).unwrap();
        assert_eq!(prefix_count(&geo, 0, 9).unwrap(), 10);
        assert_eq!(prefix_count(&geo, 0, -1).unwrap(), 0);
        let late = CostSpecializedSum::new(&ctx, vec![term(5, 40, &[(3, 1)])]).unwrap();
        assert_eq!(prefix_count(&late, 0, 39).unwrap(), 0);
        assert_eq!(prefix_count(&late, 0, 45).unwrap(), 10);
    }

    #[test]
    fn prefix_matches_reciprocal_prefix_per_term() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let den: Vec<(i64, i64)> = (0..rng.gen_range(0..4)).map(|_| (rng.gen_range(1..7), rng.gen_range(1..3))).collect();
            let a = rng.gen_range(0..20);
            let k = rng.gen_range(0..300);
            let s = CostSpecializedSum::new(&ctx, vec![term(1, a, &den)]).unwrap();
            let exps: Vec<u64> = s.terms[0].den.iter().flat_map(|&(b, e)| std::iter::repeat(b as u64).take(e as usize)).collect();
            let want = if k >= a { coeff_reciprocal_prefix(&ctx, &exps, (k - a) as usize).unwrap() } else { 0 };
            assert_eq!(prefix_count(&s, 0, k).unwrap(), want);
        }
    }

    #[test]
    fn large_tables_agree_with_recurrences() {
        let ctx = ctx();
        let den: Vec<(i64, i64)> = (1..=13).map(|b| (b, 2)).collect();
        let fast = reciprocal_table(&ctx, &den, 120_000, true).unwrap();
        let mut slow = vec![0u64; 120_000];
        slow[0] = 1;
        for &(b, e) in den.iter().chain(&[(1, 1)]) {
            for _ in 0..e {
                for i in b as usize..slow.len() {
                    slow[i] = ctx.add(slow[i], slow[i - b as usize]);
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn brute_force_examples() {
        let k = knap(&[3, 5], 14, &[2, 1], Relation::Eq);
        assert_eq!(brute_knapsack(&k, Mode::Max).unwrap(), Some((7, vec![3, 1])));
        assert_eq!(brute_knapsack(&k, Mode::Min).unwrap(), Some((7, vec![3, 1])));
        assert_eq!(brute_knapsack(&knap(&[4, 6], 7, &[1, 1], Relation::Eq), Mode::Max).unwrap(), None);
        assert_eq!(brute_knapsack(&knap(&[4, 6], 0, &[1, 1], Relation::Eq), Mode::Max).unwrap(), Some((0, vec![0, 0])));
        let huge = knap(&[1, 1, 1], 5_000_000, &[1, 1, 1], Relation::Eq);
        assert!(matches!(brute_knapsack(&huge, Mode::Max), Err(Error::SearchSpaceTooLarge { .. })));
    }

    /// All feasible points by plain enumeration.
    fn points(inst: &ILPInstance) -> Vec<Vec<i64>> {
        fn go(inst: &ILPInstance, i: usize, rem: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if i == inst.a.len() {
                if rem == 0 || inst.relation == Relation::Le {
                    out.push(cur.clone());
                }
                return;
            }
            let mut x = 0;
            while x * inst.a[i] <= rem {
                cur.push(x);
                go(inst, i + 1, rem - x * inst.a[i], cur, out);
                cur.pop();
                x += 1;
            }
        }
        let mut out = Vec::new();
        go(inst, 0, inst.b, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn generator_encodes_the_feasible_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..25 {
            let n = rng.gen_range(1..=3);
            let relation = if rng.gen_bool(0.5) { Relation::Eq } else { Relation::Le };
            let inst = knap(
                &(0..n).map(|_| rng.gen_range(1..=6)).collect::<Vec<_>>(),
                rng.gen_range(0..=25),
                &(0..n).map(|_| rng.gen_range(-5..=5)).collect::<Vec<_>>(),
                relation,
            );
            let pts = points(&inst);
            let ss = knapsack_shortsum(&inst, &mut rng, true).unwrap();
            if pts.is_empty() {
                continue;
            }
            let values: Vec<i64> = pts.iter().map(|x| x.iter().zip(&inst.c).map(|(a, b)| a * b).sum()).collect();
            let lo = *values.iter().min().unwrap();
            let hi = *values.iter().max().unwrap();
            let seed = rng.gen();
            let (m, _) = value_histogram(&ss, &inst.c, &PRIMES, 0, seed).unwrap();
            let (_, hist) = value_histogram(&ss, &inst.c, &PRIMES, (hi - m + 3) as usize, seed).unwrap();
            for (i, h) in hist.iter().enumerate() {
                let v = m + i as i64;
                let want = values.iter().filter(|&&x| x == v).count();
                assert_eq!(h, &BigInt::from(want), "{inst:?} value {v}");
            }
            assert!(m <= lo);
        }
    }

    #[test]
    fn small_knapsack_end_to_end() {
        let inst = knap(&[3, 5], 14, &[2, 1], Relation::Eq);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let opts = BsctOptions::default();
        for mode in [Mode::Max, Mode::Min] {
            assert_eq!(solve_instance(&inst, &PRIMES, mode, &opts, &mut rng).unwrap().value, Some(7));
        }
        let infeasible = knap(&[4, 6], 7, &[1, 1], Relation::Eq);
        assert_eq!(solve_instance(&infeasible, &PRIMES, Mode::Max, &opts, &mut rng).unwrap().value, None);
    }

    #[test]
    fn probe_and_doubling_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.gen_range(1..=3);
            let inst = knap(
                &(0..n).map(|_| rng.gen_range(1..=20)).collect::<Vec<_>>(),
                rng.gen_range(0..=200),
                &(0..n).map(|_| rng.gen_range(-50..=50)).collect::<Vec<_>>(),
                Relation::Eq,
            );
            let ss = knapsack_shortsum(&inst, &mut rng, true).unwrap();
            for mode in [Mode::Min, Mode::Max] {
                let bound = lp_value_bound(&inst, mode);
                let probe = BsctOptions { k0: 1 << 12, ..Default::default() };
                let doubling = BsctOptions { k0: 2, skip_probe: true, ..Default::default() };
                let exact = BsctOptions { k0: 3, skip_probe: true, exact: true, ..Default::default() };
                let a = bsct_solve(&ss, &inst.c, &PRIMES, mode, bound, &probe).unwrap();
                let b = bsct_solve(&ss, &inst.c, &PRIMES, mode, bound, &doubling).unwrap();
                let c = bsct_solve(&ss, &inst.c, &PRIMES, mode, bound, &exact).unwrap();
                let want = brute_knapsack(&inst, mode).unwrap().map(|r| r.0);
                assert_eq!(a.value, want);
                assert_eq!(b.value, want);
                assert_eq!(c.value, want);
            }
        }
    }

    #[test]
    fn prefix_counts_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = knap(&[2, 3, 7], 60, &[3, -2, 5], Relation::Le);
        let ss = knapsack_shortsum(&inst, &mut rng, true).unwrap();
        let sums: Vec<CostSpecializedSum> = PRIMES
            .iter()
            .map(|&p| specialize_cost(&ss, &inst.c, &make_field(p).unwrap(), 9).unwrap())
            .collect();
        let m = sums.iter().map(|s| min_order(s).unwrap()).min().unwrap();
        let lift = |k: i64| {
            let res: Vec<(u64, u64)> = sums.iter().map(|s| (prefix_count(s, m, k).unwrap(), s.ctx.p())).collect();
            crt_reconstruct_centered(&res).unwrap()
        };
        let total = BigInt::from(points(&inst).len());
        let mut prev = BigInt::zero();
        for k in (0..600).step_by(7) {
            let v = lift(k);
            assert!(v >= prev && v <= total);
            prev = v;
        }
        assert_eq!(lift(10_000), total);
    }

    #[test]
    fn search_respects_the_bound() {
        let ctx = ctx();
        // 1/(1-t) - 1/(1-t^2) = t + t^3 + ...
        let odd = CostSpecializedSum::new(&ctx, vec![term(1, 0, &[(1, 1)]), term(ctx.neg(1), 0, &[(2, 1)])]).unwrap();
        let opts = BsctOptions { k0: 1, ..Default::default() };
        assert_eq!(bsct_min(&[odd.clone()], Some(5), &opts).unwrap().value, Some(1));
        // t^50 with a claimed bound of 10
        let late = CostSpecializedSum::new(&ctx, vec![term(1, 50, &[]), term(1, 0, &[]), term(ctx.neg(1), 0, &[])]).unwrap();
        let err = bsct_min(&[late.clone()], Some(10), &opts).unwrap_err();
        assert!(matches!(err, Error::Unbounded { bound: 10 }));
        let found = bsct_min(&[late], Some(60), &BsctOptions { k0: 4, skip_probe: true, ..Default::default() }).unwrap();
        assert_eq!(found.value, Some(50));
        assert!(found.doublings > 0);
    }

    #[test]
    fn lp_range_examples() {
        let k = knap(&[3, 5], 14, &[2, 1], Relation::Eq);
        let (lo, hi) = lp_range(&k, &k.c).unwrap();
        assert_eq!(lo, BigRational::new(14.into(), 5.into()));
        assert_eq!(hi, BigRational::new(28.into(), 3.into()));
        assert_eq!(lp_value_bound(&k, Mode::Min), Some(9));
        assert_eq!(lp_value_bound(&k, Mode::Max), Some(3));
    }
}
