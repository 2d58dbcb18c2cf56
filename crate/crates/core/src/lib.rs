//! Termination analysis of definite logic programs with polynomial
//! interpretations.
//!
//! The pipeline approximates the call set of a program, generates symbolic
//! rigidity, interargument and decrease conditions over polynomials with
//! unknown coefficients, reduces them to Diophantine constraints and searches
//! for a solution over a small coefficient domain.

pub mod frontend;
pub mod callset;
pub mod polyalg;
pub mod congen;
pub mod diosolver;
pub mod driver;
