//! End-to-end acceptance checks. Runs without the test harness so each
//! criterion's `PASS`/`FAIL` line always reaches stdout; exits nonzero if
//! any gating criterion fails.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use gtodd::bsct::{brute_knapsack, knapsack_shortsum, solve_instance, BsctOptions, ILPInstance, Mode, Relation};
use gtodd::ctgtodd::{ct_gtodd_rational, CTResult, GToddConstantTermProblem, LTerm};
use gtodd::fixtures::{box_series, count_magic_squares, ms3_series, unit_square_qn, unit_square_series};
use gtodd::modfield::NTT_PRIMES;
use gtodd::mpa::{
    check_gamma, combine_rational, ehrhart_series_multi, parse_shortsum, pick_gamma, solve_basic, ShortSum,
    DEFAULT_DEGREE_CAP,
};
use gtodd::regseries::RegularSeries;
use gtodd::toddgen::{even_shift, gtodd, todd_r0, GToddSpec, MultiSetZ};
use gtodd::{make_field, FieldCtx, TruncSeries};
use gtodd_cli::bench::{curve, growth_ratio, BenchOp, BenchPath};
use gtodd_cli::commands::{cmd_ehrhart, cmd_ilp, IlpInput};
use gtodd_cli::config::RunConfig;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn fields() -> Vec<FieldCtx> {
    NTT_PRIMES.iter().map(|&p| make_field(p).unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let report = cmd_ehrhart(&cfg, &unit_square_series(), None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let expected: Vec<String> = cfg.primes.iter().map(|p| format!("p={p}: (1+t)/(1-t)^3")).collect();
    let lines: Vec<&str> = report.text.lines().collect();
    for e in &expected {
        if !lines.contains(&e.as_str()) {
            return Err(format!("missing line {e:?} in\n{}", report.text));
        }
    }
    if elapsed >= 1.0 {
        return Err(format!("took {elapsed:.3} s"));
    }
    Ok(format!("(1+t)/(1-t)^3 over {} primes in {elapsed:.3} s", expected.len()))
}

fn criterion_2() -> Outcome {
    for ctx in fields() {
        for n in 1..=10i64 {
            let ss = unit_square_qn(n);
            let gamma = pick_gamma(&ss, &ctx, 1).map_err(|e| e.to_string())?;
            let v = match solve_basic(&ss, &ctx, &gamma.entries).map_err(|e| e.to_string())? {
                CTResult::Scalar(v) => v,
                CTResult::Terms(_) => return Err("expected a number".into()),
            };
            if v != ctx.from_i64((n + 1) * (n + 1)) {
                return Err(format!("p={} n={n}: got {v}", ctx.p()));
            }
        }
    }
    Ok("(n+1)^2 for n = 1..10 over 3 primes".into())
}

fn criterion_3() -> Outcome {
    let check = |l: LTerm, b0: Vec<i64>, want: BigRational| -> Result<(), String> {
        let p = GToddConstantTermProblem::todd(vec![l], b0).map_err(|e| e.to_string())?;
        let got = ct_gtodd_rational(&p, &NTT_PRIMES).map_err(|e| e.to_string())?;
        if got.as_ref() != Some(&want) {
            return Err(format!("got {got:?}, want {want}"));
        }
        Ok(())
    };
    check(LTerm::new(1, 0), vec![1, 1], q(5, 12))?;
    for n in 1..=3i64 {
        check(LTerm::new(2, n), vec![-1, 1], q(1, 6) - q(n * n, 1))?;
        check(LTerm::new(1, 2 * n), vec![-1, -1], q(5, 12) + q(2 * n + 2 * n * n, 1))?;
    }
    Ok("5/12, 1/6 - n^2, 5/12 + 2n + 2n^2 recovered exactly".into())
}

type Naive = HashMap<(usize, Vec<u32>), u64>;

fn to_naive(f: &RegularSeries) -> Naive {
    f.terms().filter(|t| t.2 != 0).map(|(n, e, v)| ((n, e.to_vec()), v)).collect()
}

fn shift(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

// f_n = (1/n) sum_{i=1}^{n} i h_i f_{n-i}
fn naive_exp(ctx: &FieldCtx, h: &Naive, r: usize, d: usize) -> Naive {
    let inv = ctx.inverses_up_to(d);
    let mut f: Vec<Naive> = vec![Naive::new(); d];
    f[0].insert((0, vec![0; r]), 1);
    for n in 1..d {
        let mut acc = Naive::new();
        for ((i, ei), &hv) in h {
            if *i == 0 || *i > n {
                continue;
            }
            for ((_, ej), &fv) in &f[n - i] {
                let slot = acc.entry((n, shift(ei, ej))).or_insert(0);
                *slot = ctx.add(*slot, ctx.mul(ctx.mul(hv, fv), *i as u64));
            }
        }
        for v in acc.values_mut() {
            *v = ctx.mul(*v, inv[n]);
        }
        acc.retain(|_, v| *v != 0);
        f[n] = acc;
    }
    f.into_iter().flatten().collect()
}

// n h_n = n f_n - sum_{i=1}^{n-1} i h_i f_{n-i}, for f_0 = 1
fn naive_log(ctx: &FieldCtx, f: &Naive, d: usize) -> Naive {
    let inv = ctx.inverses_up_to(d);
    let mut by_n: Vec<Naive> = vec![Naive::new(); d];
    for (k, &v) in f {
        by_n[k.0].insert(k.clone(), v);
    }
    let mut h: Vec<Naive> = vec![Naive::new(); d];
    for n in 1..d {
        let mut acc = Naive::new();
        for (k, &v) in &by_n[n] {
            acc.insert(k.clone(), ctx.mul(v, n as u64));
        }
        for i in 1..n {
            for ((_, ei), &hv) in &h[i] {
                for ((_, ej), &fv) in &by_n[n - i] {
                    let slot = acc.entry((n, shift(ei, ej))).or_insert(0);
                    *slot = ctx.sub(*slot, ctx.mul(ctx.mul(hv, fv), i as u64));
                }
            }
        }
        for v in acc.values_mut() {
            *v = ctx.mul(*v, inv[n]);
        }
        acc.retain(|_, v| *v != 0);
        h[n] = acc;
    }
    h.into_iter().flatten().collect()
}

fn random_regular(ctx: &FieldCtx, rng: &mut ChaCha8Rng, r: usize, d: usize, c0: u64) -> RegularSeries {
    let mut terms = vec![(0usize, vec![0u32; r], c0)];
    for n in 1..d {
        // every monomial of total degree <= n in r variables
        let mut e = vec![0u32; r];
        loop {
            if e.iter().sum::<u32>() as usize <= n {
                terms.push((n, e.clone(), rng.gen_range(0..ctx.p())));
            }
            let mut i = 0;
            while i < r {
                e[i] += 1;
                if e[i] as usize <= n {
                    break;
                }
                e[i] = 0;
                i += 1;
            }
            if i == r {
                break;
            }
        }
    }
    RegularSeries::from_terms(ctx, r, d, &terms).unwrap()
}

fn criterion_4() -> Outcome {
    let ctx = make_field(NTT_PRIMES[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases = 0;
    for d in [64usize, 512, 4096] {
        for i in 0..200 {
            let mut c: Vec<u64> = (0..d).map(|_| rng.gen_range(0..ctx.p())).collect();
            c[0] = rng.gen_range(1..ctx.p());
            let f = TruncSeries::new(&ctx, c.clone());
            if f.inv().unwrap() != f.inv_schoolbook().unwrap() {
                return Err(format!("inv differs at d={d}, case {i}"));
            }
            c[0] = 1;
            let g = TruncSeries::new(&ctx, c.clone());
            if g.log().unwrap() != g.log_schoolbook().unwrap() {
                return Err(format!("log differs at d={d}, case {i}"));
            }
            c[0] = 0;
            let h = TruncSeries::new(&ctx, c);
            if h.exp().unwrap() != h.exp_schoolbook().unwrap() {
                return Err(format!("exp differs at d={d}, case {i}"));
            }
            cases += 3;
        }
    }
    for r in [1usize, 2] {
        for d in [8usize, 16] {
            for i in 0..20 {
                let h = random_regular(&ctx, &mut rng, r, d, 0);
                if to_naive(&h.exp().unwrap()) != naive_exp(&ctx, &to_naive(&h), r, d) {
                    return Err(format!("reg_exp differs at r={r} d={d}, case {i}"));
                }
                let f = random_regular(&ctx, &mut rng, r, d, 1);
                if to_naive(&f.log().unwrap()) != naive_log(&ctx, &to_naive(&f), d) {
                    return Err(format!("reg_log differs at r={r} d={d}, case {i}"));
                }
                cases += 2;
            }
        }
    }
    Ok(format!("{cases} comparisons, no differences"))
}

fn criterion_5() -> Outcome {
    let ctx = make_field(NTT_PRIMES[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 128;
    let draw = |rng: &mut ChaCha8Rng, lo: usize| -> MultiSetZ {
        let n = rng.gen_range(lo..6);
        MultiSetZ::new(
            (0..n)
                .map(|_| {
                    let b: i64 = rng.gen_range(1..30);
                    if rng.gen_bool(0.5) { b } else { -b }
                })
                .collect(),
        )
        .unwrap()
    };
    for i in 0..100 {
        let b0 = draw(&mut rng, 1);
        let b0bar = draw(&mut rng, 0);
        let fast = todd_r0(&ctx, &b0, &b0bar, d).map_err(|e| e.to_string())?;
        if (1..d).step_by(2).any(|n| fast.coeff(n) != 0) {
            return Err(format!("case {i}: odd coefficient in the even path"));
        }
        // the general path with the same shift must agree and also vanish
        let mut spec = GToddSpec::new(d);
        spec.a = even_shift(&b0, &b0bar);
        spec.b0 = b0.clone();
        spec.b0bar = b0bar.clone();
        let general = gtodd(&ctx, &spec).map_err(|e| e.to_string())?.to_series().unwrap();
        if general != fast {
            return Err(format!("case {i}: even path differs from the general path"));
        }
    }
    Ok("100 cases, odd coefficients zero, general path agrees".into())
}

fn random_fixture(rng: &mut ChaCha8Rng) -> ShortSum {
    if rng.gen_bool(0.5) {
        let dim = rng.gen_range(1..=3);
        let sides: Vec<i64> = (0..dim).map(|_| rng.gen_range(1..=4)).collect();
        box_series(&sides)
    } else {
        let n = rng.gen_range(1..=3);
        let inst = ILPInstance {
            a: (0..n).map(|_| rng.gen_range(1..=6)).collect(),
            b: rng.gen_range(0..=20),
            c: vec![0; n],
            relation: Relation::Eq,
        };
        knapsack_shortsum(&inst, rng, true).unwrap()
    }
}

fn criterion_6() -> Outcome {
    let ctx = make_field(NTT_PRIMES[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..50 {
        let ss = random_fixture(&mut rng);
        let g1 = pick_gamma(&ss, &ctx, rng.gen()).map_err(|e| e.to_string())?;
        let mut g2 = pick_gamma(&ss, &ctx, rng.gen()).map_err(|e| e.to_string())?;
        while g2.entries == g1.entries {
            g2 = pick_gamma(&ss, &ctx, rng.gen()).map_err(|e| e.to_string())?;
        }
        check_gamma(&ss, &ctx, &g2.entries).map_err(|e| e.to_string())?;
        let solve = |g: &[i64]| -> Result<String, String> {
            match solve_basic(&ss, &ctx, g).map_err(|e| e.to_string())? {
                CTResult::Scalar(v) => Ok(v.to_string()),
                CTResult::Terms(ts) => Ok(combine_rational(&ctx, &ts, DEFAULT_DEGREE_CAP)
                    .map_err(|e| e.to_string())?
                    .to_string()),
            }
        };
        let (a, b) = (solve(&g1.entries)?, solve(&g2.entries)?);
        if a != b {
            return Err(format!("fixture {i}: {a} vs {b}"));
        }
    }
    Ok("50 fixtures, two substitution vectors each, identical results".into())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let primes = &NTT_PRIMES[..2];
    let start = Instant::now();
    let mut runs = 0;
    for i in 0..100 {
        let n = rng.gen_range(1..=4);
        let inst = ILPInstance {
            a: (0..n).map(|_| rng.gen_range(1..=50)).collect(),
            b: rng.gen_range(0..=500),
            c: (0..n).map(|_| rng.gen_range(-100..=100)).collect(),
            relation: Relation::Eq,
        };
        for mode in [Mode::Max, Mode::Min] {
            let want = brute_knapsack(&inst, mode).map_err(|e| e.to_string())?.map(|(v, _)| v);
            let got = solve_instance(&inst, primes, mode, &BsctOptions::default(), &mut rng)
                .map_err(|e| e.to_string())?
                .value;
            if got != want {
                return Err(format!("instance {i} {inst:?} {mode:?}: got {got:?}, brute force {want:?}"));
            }
            runs += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        return Err(format!("suite took {elapsed:.1} s"));
    }
    Ok(format!("{runs} solves match brute force in {elapsed:.2} s"))
}

fn criterion_8() -> Outcome {
    let q = ehrhart_series_multi(&ms3_series(), &NTT_PRIMES, 8).map_err(|e| e.to_string())?;
    let coeffs = q.expand(7);
    for (k, c) in coeffs.iter().enumerate() {
        let want = BigRational::from_integer(BigInt::from(count_magic_squares(k as u64)));
        if *c != want {
            return Err(format!("t^{k}: series {c}, enumeration {want}"));
        }
    }
    Ok(format!("t^0..t^6 = {}", coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")))
}

fn criterion_9() -> Outcome {
    let ctx = make_field(NTT_PRIMES[0]).unwrap();
    let fast = curve(&ctx, BenchOp::Exp, BenchPath::Fast, 12, 15, 5).map_err(|e| e.to_string())?;
    let slow = curve(&ctx, BenchOp::Exp, BenchPath::Schoolbook, 12, 15, 5).map_err(|e| e.to_string())?;
    let times = |c: &[(usize, f64)]| c.iter().map(|x| x.1).collect::<Vec<_>>();
    let (rf, rs) = (growth_ratio(&times(&fast)), growth_ratio(&times(&slow)));
    let msg = format!("per doubling: fast x{rf:.2}, schoolbook x{rs:.2}");
    if rf <= 2.5 && rs >= 3.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Runs only when an externally generated short sum for cuww1 is present.
fn criterion_10() -> Option<Outcome> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/knapsack");
    let ss_path = root.join("cuww1.shortsum.json");
    let text = std::fs::read_to_string(&ss_path).ok()?;
    let run = || -> Outcome {
        let ss = parse_shortsum(&text).map_err(|e| e.to_string())?;
        let cost = ILPInstance::benchmark_cost(ss.z_vars);
        let cfg = RunConfig { primes: NTT_PRIMES[..2].to_vec(), mode: Mode::Max, ..RunConfig::default() };
        let report = cmd_ilp(&cfg, &IlpInput::ShortSum { ss, cost, bound: None }).map_err(|e| e.to_string())?;
        if report.text.lines().next() == Some("max: 1562142") {
            Ok("max 1562142".into())
        } else {
            Err(report.text)
        }
    };
    Some(run())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 unit-square Ehrhart series", criterion_1),
        ("2 unit-square counts", criterion_2),
        ("3 constant-term fixtures", criterion_3),
        ("4 fast vs schoolbook oracles", criterion_4),
        ("5 odd coefficients vanish", criterion_5),
        ("6 independence from the substitution vector", criterion_6),
        ("7 knapsack optimum vs brute force", criterion_7),
        ("8 3x3 magic squares", criterion_8),
        ("9 exp timing growth", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                println!("FAIL criterion {name}: {msg}");
                failed.push(name);
            }
        }
    }
    match criterion_10() {
        None => println!("SKIP criterion 10 cuww1 (stretch): no data/knapsack/cuww1.shortsum.json"),
        Some(Ok(msg)) => println!("PASS criterion 10 cuww1 (stretch): {msg}"),
        Some(Err(msg)) => println!("FAIL criterion 10 cuww1 (stretch, not gating): {msg}"),
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
