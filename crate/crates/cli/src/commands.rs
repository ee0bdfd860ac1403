//! The subcommands as functions from a configuration and parsed input to
//! a printable report.

use std::collections::BTreeMap;

use gtodd::bsct::{bsct_solve, knapsack_shortsum, lp_value_bound, BsctOptions, BsctReport, ILPInstance, Mode};
use gtodd::ctgtodd::{ct_gtodd, CTResult, SimpleRationalTerm};
use gtodd::modfield::{crt_rational, rational_reconstruct};
use gtodd::mpa::{
    combine_rational, pick_gamma, solve_basic, RationalFunctionQ, RationalFunctionT, ShortSum, DEFAULT_DEGREE_CAP,
};
use gtodd::toddgen::gtodd;
use gtodd::{Error, FieldCtx, Residue, Result};
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::files::{CtProblemFile, ToddSpecFile};

/// Line-oriented text plus the same content as JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub json: Value,
}

impl Report {
    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn crt_column(residues: &[(Residue, u64)]) -> Result<Option<String>> {
    if residues.len() < 2 {
        return Ok(None);
    }
    Ok(Some(crt_rational(residues)?.map_or_else(|| "?".to_string(), |q| fmt_rational(&q))))
}

fn residue_text(ctx: &FieldCtx, v: Residue) -> String {
    match rational_reconstruct(v, ctx) {
        Some((n, 1)) => n.to_string(),
        Some((n, d)) => format!("{n}/{d}"),
        None => v.to_string(),
    }
}

/// `gtd_0 .. gtd_{d-1}` per prime, with a reconstructed rational column
/// when two or more primes are given. For `r >= 1` there is one row per
/// `y`-monomial.
pub fn cmd_todd(cfg: &RunConfig, file: &ToddSpecFile) -> Result<Report> {
    let d = cfg.d.or(file.d).ok_or_else(|| Error::Invalid("truncation order d is required".into()))?;
    let cfg = RunConfig { d: Some(d), ..cfg.clone() };
    let ctxs = cfg.validate()?;
    let spec = file.to_spec(d)?;
    let r = spec.r();
    let series = ctxs.iter().map(|ctx| gtodd(ctx, &spec)).collect::<Result<Vec<_>>>()?;

    let mut header = vec!["n".to_string()];
    if r > 0 {
        header.push("y".into());
    }
    header.extend(cfg.primes.iter().map(|p| format!("p={p}")));
    if cfg.primes.len() > 1 {
        header.push("rational".into());
    }
    let mut text = header.join("\t") + "\n";
    let mut rows = Vec::new();
    let index = series[0].index();
    for n in 0..d {
        for slot in 0..series[0].coeff_slice(n).len() {
            let residues: Vec<(Residue, u64)> =
                series.iter().zip(&cfg.primes).map(|(s, &p)| (s.coeff_slice(n)[slot], p)).collect();
            let rational = crt_column(&residues)?;
            let exps: Vec<u32> = index.exponents(slot).to_vec();
            let mut cols = vec![n.to_string()];
            if r > 0 {
                cols.push(exps.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
            }
            cols.extend(residues.iter().map(|(v, _)| v.to_string()));
            cols.extend(rational.clone());
            text.push_str(&(cols.join("\t") + "\n"));
            rows.push(json!({
                "n": n,
                "y": exps,
                "residues": residues.iter().map(|r| r.0).collect::<Vec<_>>(),
                "rational": rational,
            }));
        }
    }
    Ok(Report {
        text,
        json: json!({"command": "todd", "d": d, "r": r, "primes": cfg.primes, "rows": rows}),
    })
}

fn fmt_term(coeff: &str, t_exp: i64, den: &[(i64, i64)]) -> String {
    let mut s = coeff.to_string();
    if t_exp != 0 {
        s.push_str(&format!("*t^{t_exp}"));
    }
    let (num, den): (Vec<_>, Vec<_>) = den.iter().partition(|&&(_, e)| e < 0);
    for &(m, e) in num {
        s.push_str(&format!("*(1-t^{m})^{}", -e));
    }
    if !den.is_empty() {
        let parts: Vec<String> = den.iter().map(|&(m, e)| format!("(1-t^{m})^{e}")).collect();
        s.push_str(&format!("/({})", parts.join("*")));
    }
    s
}

fn terms_by_key(terms: &[SimpleRationalTerm]) -> BTreeMap<(i64, Vec<(i64, i64)>), Residue> {
    terms.iter().map(|t| ((t.t_exp, t.den.clone()), t.coeff)).collect()
}

/// Term lists per prime and, with several primes, termwise reconstruction.
fn report_terms(cfg: &RunConfig, ctxs: &[FieldCtx], per_prime: &[Vec<SimpleRationalTerm>], command: &str) -> Result<Report> {
    let mut text = String::new();
    let mut json_primes = Vec::new();
    for ((ctx, terms), p) in ctxs.iter().zip(per_prime).zip(&cfg.primes) {
        text.push_str(&format!("p={p}: {} terms\n", terms.len()));
        for t in terms {
            text.push_str(&format!("  {}\n", fmt_term(&residue_text(ctx, t.coeff), t.t_exp, &t.den)));
        }
        json_primes.push(json!({
            "p": p,
            "terms": terms.iter().map(|t| json!({"coeff": t.coeff, "t_exp": t.t_exp, "den": t.den})).collect::<Vec<_>>(),
        }));
    }
    let mut json_rational = Value::Null;
    if per_prime.len() > 1 {
        let maps: Vec<_> = per_prime.iter().map(|ts| terms_by_key(ts)).collect();
        let mut keys: Vec<_> = maps.iter().flat_map(|m| m.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        text.push_str("rational:\n");
        let mut list = Vec::new();
        for key in keys {
            let residues: Vec<(Residue, u64)> =
                maps.iter().zip(&cfg.primes).map(|(m, &p)| (m.get(&key).copied().unwrap_or(0), p)).collect();
            let coeff = crt_column(&residues)?.unwrap_or_default();
            if coeff == "0" {
                continue;
            }
            text.push_str(&format!("  {}\n", fmt_term(&coeff, key.0, &key.1)));
            list.push(json!({"coeff": coeff, "t_exp": key.0, "den": key.1}));
        }
        json_rational = Value::Array(list);
    }
    Ok(Report {
        text,
        json: json!({"command": command, "primes": json_primes, "rational": json_rational}),
    })
}

/// Constant term of a generalized-Todd-type series.
pub fn cmd_ct(cfg: &RunConfig, file: &CtProblemFile) -> Result<Report> {
    let ctxs = cfg.validate()?;
    let results = ctxs
        .iter()
        .map(|ctx| ct_gtodd(ctx, &file.to_problem(ctx)?))
        .collect::<Result<Vec<_>>>()?;
    if results.iter().all(|r| matches!(r, CTResult::Scalar(_))) {
        let residues: Vec<(Residue, u64)> =
            results.iter().zip(&cfg.primes).map(|(r, &p)| (r.scalar().unwrap(), p)).collect();
        let mut text = String::new();
        for &(v, p) in &residues {
            text.push_str(&format!("p={p}: {v}\n"));
        }
        let rational = crt_column(&residues)?;
        if let Some(q) = &rational {
            text.push_str(&format!("rational: {q}\n"));
        }
        return Ok(Report {
            text,
            json: json!({
                "command": "ct",
                "residues": residues.iter().map(|&(v, p)| json!({"p": p, "value": v})).collect::<Vec<_>>(),
                "rational": rational,
            }),
        });
    }
    let per_prime: Vec<Vec<SimpleRationalTerm>> = results
        .into_iter()
        .map(|r| match r {
            CTResult::Terms(ts) => ts,
            CTResult::Scalar(v) => vec![SimpleRationalTerm { coeff: v, t_exp: 0, den: vec![] }],
        })
        .collect();
    report_terms(cfg, &ctxs, &per_prime, "ct")
}

/// The short sum as a rational function in `t` (or a number when the sum
/// has no `t`), per prime and reconstructed over the rationals. Falls back
/// to the uncombined term list when the common denominator is too large.
pub fn cmd_ehrhart(cfg: &RunConfig, ss: &ShortSum, degree_cap: Option<usize>) -> Result<Report> {
    let ctxs = cfg.validate()?;
    let cap = degree_cap.unwrap_or(DEFAULT_DEGREE_CAP);
    let mut solved = Vec::new();
    for ctx in &ctxs {
        let gamma = pick_gamma(ss, ctx, cfg.seed)?;
        solved.push((solve_basic(ss, ctx, &gamma.entries)?, gamma));
    }
    if ss.t_vars == 0 {
        let residues: Vec<(Residue, u64)> =
            solved.iter().zip(&cfg.primes).map(|((r, _), &p)| (r.scalar().unwrap(), p)).collect();
        let mut text = String::new();
        for &(v, p) in &residues {
            text.push_str(&format!("p={p}: {v}\n"));
        }
        let rational = crt_column(&residues)?;
        if let Some(q) = &rational {
            text.push_str(&format!("rational: {q}\n"));
        }
        return Ok(Report {
            text,
            json: json!({
                "command": "ehrhart",
                "seed": cfg.seed,
                "residues": residues.iter().map(|&(v, p)| json!({"p": p, "value": v})).collect::<Vec<_>>(),
                "rational": rational,
            }),
        });
    }
    let terms: Vec<Vec<SimpleRationalTerm>> = solved
        .into_iter()
        .map(|(r, _)| match r {
            CTResult::Terms(ts) => ts,
            CTResult::Scalar(_) => unreachable!("sums with t give terms"),
        })
        .collect();
    let mut images: Vec<RationalFunctionT> = Vec::new();
    for (ctx, ts) in ctxs.iter().zip(&terms) {
        match combine_rational(ctx, ts, cap) {
            Ok(f) => images.push(f),
            Err(Error::DegreeOverflow { degree, cap }) => {
                let mut report = report_terms(cfg, &ctxs, &terms, "ehrhart")?;
                report.text = format!("# common denominator degree {degree} exceeds {cap}; terms left uncombined\n{}", report.text);
                return Ok(report);
            }
            Err(e) => return Err(e),
        }
    }
    let mut text = String::new();
    for (f, p) in images.iter().zip(&cfg.primes) {
        text.push_str(&format!("p={p}: {f}\n"));
    }
    let mut rational = None;
    if images.len() > 1 {
        let q = RationalFunctionQ::from_images(&images)?;
        text.push_str(&format!("rational: {q}\n"));
        rational = Some(q);
    }
    Ok(Report {
        text,
        json: json!({
            "command": "ehrhart",
            "seed": cfg.seed,
            "images": images.iter().zip(&cfg.primes).map(|(f, p)| json!({
                "p": p, "num": f.num, "den": f.den, "text": f.to_string(),
            })).collect::<Vec<_>>(),
            "rational": rational.map(|q| json!({
                "num": q.num.iter().map(fmt_rational).collect::<Vec<_>>(),
                "den": q.den.iter().map(fmt_rational).collect::<Vec<_>>(),
                "text": q.to_string(),
            })),
        }),
    })
}

/// Where the points of an `ilp` run come from.
#[derive(Debug, Clone)]
pub enum IlpInput {
    /// A short sum for `f(P; y)` with a cost vector and an optional bound
    /// on the optimum from the unfavourable side.
    ShortSum { ss: ShortSum, cost: Vec<i64>, bound: Option<i64> },
    /// A small knapsack; its short sum is generated by enumeration.
    Knapsack(ILPInstance),
}

pub fn cmd_ilp(cfg: &RunConfig, input: &IlpInput) -> Result<Report> {
    cfg.validate()?;
    let opts = BsctOptions {
        k0: cfg.k0,
        exact: cfg.exact,
        skip_probe: false,
        seed: cfg.seed,
    };
    let report: BsctReport = match input {
        IlpInput::ShortSum { ss, cost, bound } => bsct_solve(ss, cost, &cfg.primes, cfg.mode, *bound, &opts)?,
        IlpInput::Knapsack(inst) => {
            inst.validate()?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let ss = knapsack_shortsum(inst, &mut rng, true)?;
            bsct_solve(&ss, &inst.c, &cfg.primes, cfg.mode, lp_value_bound(inst, cfg.mode), &opts)?
        }
    };
    let mode = match cfg.mode {
        Mode::Max => "max",
        Mode::Min => "min",
    };
    let value = report.value.map_or_else(|| "infeasible".to_string(), |v| v.to_string());
    let text = format!(
        "{mode}: {value}\n# m = {}, probe hit: {}, doublings: {}, prefix evaluations: {}\n",
        report.m, report.via_probe, report.doublings, report.prefix_evals
    );
    Ok(Report {
        text,
        json: json!({
            "command": "ilp",
            "mode": mode,
            "value": report.value,
            "m": report.m,
            "via_probe": report.via_probe,
            "doublings": report.doublings,
            "prefix_evals": report.prefix_evals,
        }),
    })
}
