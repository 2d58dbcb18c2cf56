//! Symbolic polynomials over unknown coefficients and over program variables.

mod interp;
mod parse;
mod poly;
mod template;

use std::collections::BTreeMap;

use thiserror::Error;

pub use interp::{
    cmp_nat, compose, concrete, eval, eval_upoly, for_each_valuation, CmpOutcome, Interpretation,
};
pub use poly::{Monomial, Poly, Ring, UPoly, Unknown, VPoly, Var};
pub use template::{symbol_stem, PolyTemplate, Shape, UnknownMinter};

/// Values chosen for unknown coefficients.
pub type Assignment = BTreeMap<Unknown, u64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("`{var}` is not a formal parameter of an arity-{arity} polynomial")]
    ArityMismatch { var: String, arity: usize },
    #[error("symbol `{0}` has no interpretation")]
    Uninterpreted(String),
    #[error("`{0}` has no value")]
    Unassigned(String),
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}
