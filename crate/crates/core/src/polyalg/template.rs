use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use super::poly::{Monomial, Poly, UPoly, Unknown, VPoly, Var};
use super::Assignment;
use crate::frontend::Symbol;

/// Class of polynomials a template ranges over.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Linear,
    SimpleMixed,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Linear => "linear",
            Shape::SimpleMixed => "simple-mixed",
        })
    }
}

/// Hands out unknown names, never the same one twice.
#[derive(Clone, Debug, Default)]
pub struct UnknownMinter {
    used: BTreeSet<String>,
    stems: BTreeSet<String>,
}

impl UnknownMinter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserves a stem derived from `base`, adding primes until it is unused.
    pub fn stem(&mut self, base: &str) -> String {
        let mut s = base.to_string();
        while !self.stems.insert(s.clone()) {
            s.push('\'');
        }
        s
    }

    pub fn fresh(&mut self, name: &str) -> Unknown {
        let mut s = name.to_string();
        while !self.used.insert(s.clone()) {
            s.push('\'');
        }
        Unknown::new(&s)
    }
}

/// Identifier-safe rendering of a symbol for use in unknown names.
pub fn symbol_stem(sym: &Symbol) -> String {
    let s = sym.as_str();
    match s {
        "+" => return "plus".into(),
        "*" => return "times".into(),
        "[]" => return "nil".into(),
        "." => return "cons".into(),
        _ => {}
    }
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            out.push(c);
        } else {
            out.push_str(&format!("x{:x}", c as u32));
        }
    }
    if !out.starts_with(|c: char| c.is_ascii_alphabetic()) {
        out.insert(0, 'k');
    }
    out
}

/// A polynomial of a given shape whose coefficients are fresh unknowns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyTemplate {
    pub shape: Shape,
    pub arity: usize,
    pub coeffs: Vec<(Monomial<Var>, Unknown)>,
}

/// Monomials of a shape over formals `X1..Xn`, paired with name suffixes.
fn shape_monomials(shape: Shape, arity: usize) -> Vec<(Monomial<Var>, String)> {
    let sep = if arity > 9 { "." } else { "" };
    let mut out = vec![(Monomial::one(), "0".to_string())];
    for k in 1..=arity {
        out.push((Monomial::var(Var::formal(k)), k.to_string()));
    }
    if shape == Shape::Linear {
        return out;
    }
    if arity == 1 {
        out.push((Monomial::from_powers([(Var::formal(1), 2)]), "2".into()));
        return out;
    }
    for k in 1..=arity {
        out.push((Monomial::from_powers([(Var::formal(k), 2)]), format!("{k}{sep}{k}")));
    }
    for mask in 1u64..(1 << arity) {
        if mask.count_ones() < 2 {
            continue;
        }
        let ks: Vec<usize> = (1..=arity).filter(|k| mask & (1 << (k - 1)) != 0).collect();
        let m = Monomial::from_powers(ks.iter().map(|&k| (Var::formal(k), 1)));
        let name = ks.iter().map(usize::to_string).collect::<Vec<_>>().join(sep);
        out.push((m, name));
    }
    out
}

impl PolyTemplate {
    /// Mints unknowns `{stem}_{suffix}`: `_0` constant, `_k` for `Xk`; for
    /// unary simple-mixed `_2` is the square, otherwise `_kk` squares and
    /// `_jk..` mixed products.
    pub fn new(shape: Shape, arity: usize, stem: &str, minter: &mut UnknownMinter) -> Self {
        assert!(arity < 64, "arity {arity} too large for a template");
        let coeffs = shape_monomials(shape, arity)
            .into_iter()
            .map(|(m, suffix)| (m, minter.fresh(&format!("{stem}_{suffix}"))))
            .collect();
        PolyTemplate { shape, arity, coeffs }
    }

    pub fn unknowns(&self) -> impl Iterator<Item = &Unknown> {
        self.coeffs.iter().map(|(_, u)| u)
    }

    /// Unknowns of the non-constant monomials.
    pub fn nonconstant_unknowns(&self) -> impl Iterator<Item = &Unknown> {
        self.coeffs.iter().filter(|(m, _)| !m.is_one()).map(|(_, u)| u)
    }

    pub fn unknown_for(&self, m: &Monomial<Var>) -> Option<&Unknown> {
        self.coeffs.iter().find(|(n, _)| n == m).map(|(_, u)| u)
    }

    /// The symbolic polynomial over formals.
    pub fn poly(&self) -> VPoly {
        Poly::from_terms(self.coeffs.iter().map(|(m, u)| (m.clone(), UPoly::unknown(u.clone()))))
    }

    /// The concrete polynomial under `a`; unassigned unknowns count as 0.
    pub fn instantiate(&self, a: &Assignment) -> VPoly {
        Poly::from_terms(self.coeffs.iter().map(|(m, u)| {
            let n = a.get(u).copied().unwrap_or(0);
            (m.clone(), UPoly::constant(BigInt::from(n)))
        }))
    }
}
