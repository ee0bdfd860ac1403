//! Short sums of simple rational functions and their JSON file format.
//!
//! ```json
//! {"t_vars": 1, "z_vars": 2,
//!  "terms": [{"num": [{"c": 1, "t": 0, "z": [0, 0]}],
//!             "den": [{"t": 0, "z": [1, 0]}, {"t": 1, "z": [0, 0]}]}]}
//! ```
//!
//! Each term is `sum c t^t z^z / prod (1 - t^t z^z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumMonomial {
    pub c: i64,
    #[serde(default)]
    pub t: i64,
    pub z: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenFactor {
    #[serde(default)]
    pub t: i64,
    pub z: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortSumTerm {
    pub num: Vec<NumMonomial>,
    pub den: Vec<DenFactor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortSum {
    /// 0: no surviving variable; 1: a single variable `t`.
    pub t_vars: u32,
    pub z_vars: usize,
    pub terms: Vec<ShortSumTerm>,
}

fn parse_error(location: String, message: impl Into<String>) -> Error {
    Error::Parse {
        location,
        message: message.into(),
    }
}

impl ShortSum {
    pub fn new(t_vars: u32, z_vars: usize) -> Self {
        ShortSum {
            t_vars,
            z_vars,
            terms: Vec::new(),
        }
    }

    /// Checks vector lengths, the `t_vars` range and that no denominator
    /// factor is `1 - 1`.
    pub fn validate(&self) -> Result<()> {
        if self.t_vars > 1 {
            return Err(parse_error(
                "t_vars".into(),
                format!("{} surviving variables requested, at most 1 supported", self.t_vars),
            ));
        }
        for (i, term) in self.terms.iter().enumerate() {
            for (j, mono) in term.num.iter().enumerate() {
                let loc = format!("terms[{i}].num[{j}]");
                if mono.z.len() != self.z_vars {
                    return Err(parse_error(
                        format!("{loc}.z"),
                        format!("expected {} exponents, found {}", self.z_vars, mono.z.len()),
                    ));
                }
                if self.t_vars == 0 && mono.t != 0 {
                    return Err(parse_error(format!("{loc}.t"), "t exponent given but t_vars is 0"));
                }
            }
            for (j, fac) in term.den.iter().enumerate() {
                let loc = format!("terms[{i}].den[{j}]");
                if fac.z.len() != self.z_vars {
                    return Err(parse_error(
                        format!("{loc}.z"),
                        format!("expected {} exponents, found {}", self.z_vars, fac.z.len()),
                    ));
                }
                if self.t_vars == 0 && fac.t != 0 {
                    return Err(parse_error(format!("{loc}.t"), "t exponent given but t_vars is 0"));
                }
                if fac.t == 0 && fac.z.iter().all(|&e| e == 0) {
                    return Err(parse_error(loc, "factor 1 - 1 vanishes identically"));
                }
            }
        }
        Ok(())
    }

    /// Largest number of denominator factors in a term.
    pub fn max_factors(&self) -> usize {
        self.terms.iter().map(|t| t.den.len()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("short sums serialize")
    }
}

/// Parses and validates a short sum from JSON text.
pub fn parse_shortsum(text: &str) -> Result<ShortSum> {
    let ss: ShortSum = serde_json::from_str(text).map_err(|e| {
        parse_error(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    ss.validate()?;
    Ok(ss)
}
