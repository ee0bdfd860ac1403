//! Wall-clock timing of the fast and schoolbook series paths.

use std::hint::black_box;
use std::time::Instant;

use gtodd::{FieldCtx, Result, TruncSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchOp {
    Exp,
    Log,
    Inv,
}

impl BenchOp {
    pub fn name(self) -> &'static str {
        match self {
            BenchOp::Exp => "exp",
            BenchOp::Log => "log",
            BenchOp::Inv => "inv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exp" => Some(BenchOp::Exp),
            "log" => Some(BenchOp::Log),
            "inv" => Some(BenchOp::Inv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchPath {
    Fast,
    Schoolbook,
}

impl BenchPath {
    pub fn name(self) -> &'static str {
        match self {
            BenchPath::Fast => "fast",
            BenchPath::Schoolbook => "schoolbook",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fast" => Some(BenchPath::Fast),
            "schoolbook" => Some(BenchPath::Schoolbook),
            _ => None,
        }
    }
}

/// A random operand valid for `op`: constant term 0 for exp, 1 for log.
pub fn operand(ctx: &FieldCtx, op: BenchOp, d: usize, seed: u64) -> TruncSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<u64> = (0..d).map(|_| rng.gen_range(0..ctx.p())).collect();
    if let Some(c0) = c.first_mut() {
        *c0 = match op {
            BenchOp::Exp => 0,
            BenchOp::Log => 1,
            BenchOp::Inv => rng.gen_range(1..ctx.p()),
        };
    }
    TruncSeries::new(ctx, c)
}

/// Seconds for one evaluation.
pub fn time_once(op: BenchOp, path: BenchPath, f: &TruncSeries) -> Result<f64> {
    let start = Instant::now();
    let out = match (op, path) {
        (BenchOp::Exp, BenchPath::Fast) => f.exp()?,
        (BenchOp::Exp, BenchPath::Schoolbook) => f.exp_schoolbook()?,
        (BenchOp::Log, BenchPath::Fast) => f.log()?,
        (BenchOp::Log, BenchPath::Schoolbook) => f.log_schoolbook()?,
        (BenchOp::Inv, BenchPath::Fast) => f.inv()?,
        (BenchOp::Inv, BenchPath::Schoolbook) => f.inv_schoolbook()?,
    };
    black_box(out);
    Ok(start.elapsed().as_secs_f64())
}

/// Median over `runs` evaluations on one operand.
pub fn median_time(ctx: &FieldCtx, op: BenchOp, path: BenchPath, d: usize, runs: usize) -> Result<f64> {
    let f = operand(ctx, op, d, d as u64);
    let mut times = (0..runs.max(1)).map(|_| time_once(op, path, &f)).collect::<Result<Vec<_>>>()?;
    times.sort_by(|a, b| a.total_cmp(b));
    Ok(times[times.len() / 2])
}

/// Geometric mean of successive ratios `t[i+1] / t[i]`.
pub fn growth_ratio(times: &[f64]) -> f64 {
    if times.len() < 2 {
        return 1.0;
    }
    (times[times.len() - 1] / times[0]).powf(1.0 / (times.len() - 1) as f64)
}

/// Medians for `d = 2^from ..= 2^to`.
pub fn curve(ctx: &FieldCtx, op: BenchOp, path: BenchPath, from: u32, to: u32, runs: usize) -> Result<Vec<(usize, f64)>> {
    (from..=to)
        .map(|k| {
            let d = 1usize << k;
            Ok((d, median_time(ctx, op, path, d, runs)?))
        })
        .collect()
}

/// CSV with header `op,path,d,median_seconds`.
pub fn bench_csv(ctx: &FieldCtx, ops: &[BenchOp], paths: &[BenchPath], from: u32, to: u32, runs: usize) -> Result<String> {
    let mut out = String::from("op,path,d,median_seconds\n");
    for &op in ops {
        for &path in paths {
            for (d, t) in curve(ctx, op, path, from, to, runs)? {
                out.push_str(&format!("{},{},{},{:.6e}\n", op.name(), path.name(), d, t));
            }
        }
    }
    Ok(out)
}
