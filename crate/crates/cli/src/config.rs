use std::path::PathBuf;

use gtodd::bsct::{Mode, DEFAULT_K0};
use gtodd::modfield::NTT_PRIMES;
use gtodd::mpa::DEFAULT_SEED;
use gtodd::{make_field, Error, FieldCtx, Result};

/// Settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub primes: Vec<u64>,
    /// Truncation order, for commands that have one.
    pub d: Option<usize>,
    pub seed: u64,
    pub k0: usize,
    pub mode: Mode,
    pub exact: bool,
    pub json: bool,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            primes: NTT_PRIMES[..3].to_vec(),
            d: None,
            seed: DEFAULT_SEED,
            k0: DEFAULT_K0,
            mode: Mode::Max,
            exact: false,
            json: false,
            input: None,
            output: None,
        }
    }
}

impl RunConfig {
    /// Checks the prime list and, when `d` is set, that `d >= 1` and every
    /// prime exceeds it. Returns the field contexts in prime-list order.
    pub fn validate(&self) -> Result<Vec<FieldCtx>> {
        if self.primes.is_empty() {
            return Err(Error::Invalid("no primes given".into()));
        }
        for (i, p) in self.primes.iter().enumerate() {
            if self.primes[..i].contains(p) {
                return Err(Error::DuplicatePrime(*p));
            }
        }
        if let Some(d) = self.d {
            if d == 0 {
                return Err(Error::Invalid("truncation order must be at least 1".into()));
            }
            if let Some(&p) = self.primes.iter().find(|&&p| p <= d as u64) {
                return Err(Error::CharTooSmall { p, d });
            }
        }
        if self.k0 == 0 {
            return Err(Error::Invalid("k0 must be at least 1".into()));
        }
        self.primes.iter().map(|&p| make_field(p)).collect()
    }
}

/// Process exit status for an error: 2 for invalid input or configuration,
/// 3 for arithmetic obstructions (unsuitable prime, no valid γ, unbounded
/// search), 4 for resource caps.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnsuitablePrime { .. }
        | Error::NoValidGamma { .. }
        | Error::InvalidGamma { .. }
        | Error::NotInvertibleConstantTerm
        | Error::Unbounded { .. } => 3,
        Error::ResourceCap(_) | Error::DegreeOverflow { .. } | Error::SearchSpaceTooLarge { .. } | Error::NoFFTSupport { .. } => 4,
        _ => 2,
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<T>().map_err(|_| Error::Parse {
                location: what.to_string(),
                message: format!("cannot read {x:?}"),
            })
        })
        .collect()
}
