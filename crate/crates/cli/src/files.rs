//! JSON input formats for the `todd` and `ct` subcommands.
//!
//! Numbers that may be rational are given as integers or strings `"a/b"`.
//!
//! Todd spec: `{"a": "1/2", "b0": [1, 2], "b0bar": [], "pairs": [{"b": [1], "bbar": []}], "d": 6}`
//!
//! Constant-term problem:
//! `{"l": [{"c": 1, "a": 0, "t": 0}], "b0": [1, 1], "b0bar": [],
//!   "pairs": [{"b": [2], "bbar": [], "t": {"monomial": 1}}]}`
//! where a pair's `t` is `{"monomial": m}` for `t^m` or `{"numeric": "3/4"}`.

use std::path::Path;

use gtodd::ctgtodd::{CTPair, GToddConstantTermProblem, LTerm, TDescriptor};
use gtodd::toddgen::{GToddSpec, MultiSetZ};
use gtodd::{Error, FieldCtx, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Default for Num {
    fn default() -> Self {
        Num::Int(0)
    }
}

impl Num {
    pub fn to_rational(&self, location: &str) -> Result<BigRational> {
        match self {
            Num::Int(v) => Ok(BigRational::from_integer((*v).into())),
            Num::Text(s) => parse_rational(s).ok_or_else(|| Error::Parse {
                location: location.to_string(),
                message: format!("not a rational number: {s:?}"),
            }),
        }
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    #[serde(default)]
    pub b: Vec<i64>,
    #[serde(default)]
    pub bbar: Vec<i64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToddSpecFile {
    #[serde(default)]
    pub a: Num,
    #[serde(default)]
    pub b0: Vec<i64>,
    #[serde(default)]
    pub b0bar: Vec<i64>,
    #[serde(default)]
    pub pairs: Vec<PairFile>,
    #[serde(default)]
    pub d: Option<usize>,
}

impl ToddSpecFile {
    pub fn to_spec(&self, d: usize) -> Result<GToddSpec> {
        let mut spec = GToddSpec::new(d);
        spec.a = self.a.to_rational("a")?;
        spec.b0 = MultiSetZ::new(self.b0.clone()).map_err(|e| located("b0", e))?;
        spec.b0bar = MultiSetZ::new(self.b0bar.clone()).map_err(|e| located("b0bar", e))?;
        spec.pairs = self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok((
                    MultiSetZ::with_zeros(p.b.clone()),
                    MultiSetZ::new(p.bbar.clone()).map_err(|e| located(&format!("pairs[{i}].bbar"), e))?,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TFile {
    Numeric(Num),
    Monomial(i64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtPairFile {
    #[serde(default)]
    pub b: Vec<i64>,
    #[serde(default)]
    pub bbar: Vec<i64>,
    pub t: TFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LFile {
    pub c: Num,
    #[serde(default)]
    pub a: Num,
    #[serde(default)]
    pub t: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtProblemFile {
    pub l: Vec<LFile>,
    #[serde(default)]
    pub b0: Vec<i64>,
    #[serde(default)]
    pub b0bar: Vec<i64>,
    #[serde(default)]
    pub pairs: Vec<CtPairFile>,
}

impl CtProblemFile {
    /// The problem over `ctx`; numeric `t_i` are reduced into the field.
    pub fn to_problem(&self, ctx: &FieldCtx) -> Result<GToddConstantTermProblem> {
        let l = self
            .l
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Ok(LTerm {
                    coeff: t.c.to_rational(&format!("l[{i}].c"))?,
                    exponent: t.a.to_rational(&format!("l[{i}].a"))?,
                    t_exp: t.t,
                })
            })
            .collect::<Result<_>>()?;
        let pairs = self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let t = match &p.t {
                    TFile::Monomial(m) => TDescriptor::Monomial(*m),
                    TFile::Numeric(v) => TDescriptor::Numeric(ctx.from_rational(&v.to_rational(&format!("pairs[{i}].t"))?)?),
                };
                Ok(CTPair {
                    b: MultiSetZ::with_zeros(p.b.clone()),
                    bbar: MultiSetZ::new(p.bbar.clone()).map_err(|e| located(&format!("pairs[{i}].bbar"), e))?,
                    t,
                })
            })
            .collect::<Result<_>>()?;
        Ok(GToddConstantTermProblem {
            l,
            b0: MultiSetZ::new(self.b0.clone()).map_err(|e| located("b0", e))?,
            b0bar: MultiSetZ::new(self.b0bar.clone()).map_err(|e| located("b0bar", e))?,
            pairs,
        })
    }
}

fn located(location: &str, e: Error) -> Error {
    Error::Parse {
        location: location.to_string(),
        message: e.to_string(),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("{what}: line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/6"), Some(BigRational::new((-1).into(), 2.into())));
        assert_eq!(parse_rational(" 7 "), Some(BigRational::from_integer(7.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn ct_file_round_trip() {
        let text = r#"{"l": [{"c": 1, "a": "1/2", "t": 2}], "b0": [1, 1],
                       "pairs": [{"b": [0, 3], "t": {"monomial": 1}}, {"b": [1], "t": {"numeric": "2/3"}}]}"#;
        let f: CtProblemFile = parse_json(text, "ct").unwrap();
        let ctx = gtodd::make_field(101).unwrap();
        let prob = f.to_problem(&ctx).unwrap();
        assert_eq!(prob.r(), 2);
        assert_eq!(prob.d1(), 2);
        assert_eq!(prob.pairs[1].t, TDescriptor::Numeric(ctx.from_rational(&parse_rational("2/3").unwrap()).unwrap()));
        assert!(parse_json::<CtProblemFile>(r#"{"l": [], "bogus": 1}"#, "ct").is_err());
    }

    #[test]
    fn todd_file_rejects_zero_in_b0() {
        let f: ToddSpecFile = parse_json(r#"{"b0": [1, 0]}"#, "todd").unwrap();
        assert!(matches!(f.to_spec(4), Err(Error::Parse { .. })));
    }
}
