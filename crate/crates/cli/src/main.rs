use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gtodd::bsct::{ILPInstance, Mode, Relation, DEFAULT_K0};
use gtodd::modfield::NTT_PRIMES;
use gtodd::mpa::{parse_shortsum, DEFAULT_SEED};
use gtodd::{make_field, Error, Result};
use gtodd_cli::bench::{bench_csv, BenchOp, BenchPath};
use gtodd_cli::commands::{cmd_ct, cmd_ehrhart, cmd_ilp, cmd_todd, IlpInput, Report};
use gtodd_cli::config::{exit_code, parse_list, RunConfig};
use gtodd_cli::files::{parse_json, read_text, CtProblemFile, Num, PairFile, ToddSpecFile};

#[derive(Parser)]
#[command(name = "gtodd", version, about = "Truncated power series, generalized Todd polynomials and lattice-point counting over prime fields")]
struct Cli {
    /// Print JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to a file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Comma-separated primes below 2^32.
    #[arg(long)]
    primes: Option<String>,
    /// RNG seed for the substitution vector, or "random".
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generalized Todd sequence gtd_0 .. gtd_{d-1}.
    Todd {
        /// JSON spec file; the inline flags below are used when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        b0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b0bar: Option<String>,
        /// Shift a in e^{as}, integer or "n/d".
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Constant term of a generalized-Todd-type series.
    Ct {
        #[arg(long)]
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sum a short rational-function sum; with t, the Ehrhart-type series.
    Ehrhart {
        #[arg(long)]
        shortsum: PathBuf,
        /// Largest common-denominator degree before falling back to a term list.
        #[arg(long)]
        degree_cap: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Integer optimum of a linear cost over the points of a short sum or a small knapsack.
    Ilp {
        /// Short sum of f(P; y) (no t).
        #[arg(long)]
        shortsum: Option<PathBuf>,
        /// Knapsack instance JSON: {"a": [...], "b": .., "c": [...], "relation": "eq"|"le"}.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Inline knapsack row.
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<i64>,
        #[arg(long, value_enum, default_value = "eq")]
        relation: RelationArg,
        #[arg(long, allow_hyphen_values = true)]
        cost: Option<String>,
        /// Known bound on the optimum from the unfavourable side (short-sum input only).
        #[arg(long, allow_hyphen_values = true)]
        bound: Option<i64>,
        #[arg(long, default_value_t = DEFAULT_K0)]
        k0: usize,
        #[arg(long, value_enum, default_value = "max")]
        mode: ModeArg,
        /// Decide zero-ness from the CRT lift of the prefix counts.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        common: Common,
    },
    /// CSV timing curves of fast and schoolbook exp/log/inv.
    Bench {
        #[arg(long, default_value = "exp,log,inv")]
        ops: String,
        #[arg(long, default_value = "fast,schoolbook")]
        paths: String,
        /// log2 of the smallest length.
        #[arg(long, default_value_t = 10)]
        from: u32,
        /// log2 of the largest length.
        #[arg(long, default_value_t = 14)]
        to: u32,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = NTT_PRIMES[0])]
        prime: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Max,
    Min,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Eq,
    Le,
}

fn config(common: &Common, default_primes: usize) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    cfg.primes = match &common.primes {
        Some(s) => parse_list(s, "--primes")?,
        None => NTT_PRIMES[..default_primes].to_vec(),
    };
    cfg.seed = match common.seed.as_deref() {
        None => DEFAULT_SEED,
        Some("random") => rand::random(),
        Some(s) => s.parse().map_err(|_| Error::Parse {
            location: "--seed".into(),
            message: format!("expected an integer or \"random\", got {s:?}"),
        })?,
    };
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<String> {
    let report: Report = match &cli.command {
        Command::Todd { spec, b0, b0bar, a, d, common } => {
            let mut cfg = config(common, 3)?;
            cfg.d = *d;
            let file = match spec {
                Some(path) => parse_json::<ToddSpecFile>(&read_text(path)?, &path.display().to_string())?,
                None => ToddSpecFile {
                    a: a.clone().map_or(Num::Int(0), Num::Text),
                    b0: b0.as_deref().map_or(Ok(vec![]), |s| parse_list(s, "--b0"))?,
                    b0bar: b0bar.as_deref().map_or(Ok(vec![]), |s| parse_list(s, "--b0bar"))?,
                    pairs: Vec::<PairFile>::new(),
                    d: None,
                },
            };
            cmd_todd(&cfg, &file)?
        }
        Command::Ct { problem, common } => {
            let cfg = config(common, 3)?;
            let file: CtProblemFile = parse_json(&read_text(problem)?, &problem.display().to_string())?;
            cmd_ct(&cfg, &file)?
        }
        Command::Ehrhart { shortsum, degree_cap, common } => {
            let cfg = config(common, 3)?;
            let ss = parse_shortsum(&read_text(shortsum)?)?;
            cmd_ehrhart(&cfg, &ss, *degree_cap)?
        }
        Command::Ilp { shortsum, instance, a, b, relation, cost, bound, k0, mode, exact, common } => {
            let mut cfg = config(common, 2)?;
            cfg.k0 = *k0;
            cfg.exact = *exact;
            cfg.mode = match mode {
                ModeArg::Max => Mode::Max,
                ModeArg::Min => Mode::Min,
            };
            let cost = cost.as_deref().map(|s| parse_list::<i64>(s, "--cost")).transpose()?;
            let input = match (shortsum, instance, a) {
                (Some(path), None, None) => IlpInput::ShortSum {
                    ss: parse_shortsum(&read_text(path)?)?,
                    cost: cost.ok_or_else(|| Error::Invalid("--cost is required with --shortsum".into()))?,
                    bound: *bound,
                },
                (None, Some(path), None) => {
                    let mut inst: ILPInstance = parse_json(&read_text(path)?, &path.display().to_string())?;
                    if let Some(c) = cost {
                        inst.c = c;
                    }
                    IlpInput::Knapsack(inst)
                }
                (None, None, Some(a)) => IlpInput::Knapsack(ILPInstance {
                    a: parse_list(a, "--a")?,
                    b: b.ok_or_else(|| Error::Invalid("--b is required with --a".into()))?,
                    c: cost.ok_or_else(|| Error::Invalid("--cost is required with --a".into()))?,
                    relation: match relation {
                        RelationArg::Eq => Relation::Eq,
                        RelationArg::Le => Relation::Le,
                    },
                }),
                _ => return Err(Error::Invalid("give exactly one of --shortsum, --instance, --a".into())),
            };
            cmd_ilp(&cfg, &input)?
        }
        Command::Bench { ops, paths, from, to, runs, prime } => {
            let ops = ops
                .split(',')
                .map(|s| BenchOp::parse(s.trim()).ok_or_else(|| Error::Invalid(format!("unknown op {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let paths = paths
                .split(',')
                .map(|s| BenchPath::parse(s.trim()).ok_or_else(|| Error::Invalid(format!("unknown path {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if from > to || *to >= 28 {
                return Err(Error::Invalid("need from <= to < 28".into()));
            }
            let ctx = make_field(*prime)?;
            if ctx.p() <= 1u64 << to {
                return Err(Error::CharTooSmall { p: *prime, d: 1 << to });
            }
            return bench_csv(&ctx, &ops, &paths, *from, *to, *runs);
        }
    };
    Ok(report.render(cli.json))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, out) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
