pub mod bsct;
pub mod ctgtodd;
pub mod error;
pub mod fixtures;
pub mod modfield;
pub mod mpa;
pub mod regseries;
pub mod series;
pub mod toddgen;

pub use error::{Error, Result};
pub use modfield::{make_field, FieldCtx, Residue};
pub use series::TruncSeries;
