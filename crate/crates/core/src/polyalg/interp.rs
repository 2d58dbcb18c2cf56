use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::{Poly, UPoly, VPoly, Var};
use super::{Assignment, PolyError};
use crate::frontend::{Atom, Symbol, Term};

/// Substitutes `args[k-1]` for each formal `Xk` of `p`.
pub fn compose(p: &VPoly, args: &[VPoly]) -> Result<VPoly, PolyError> {
    for v in p.vars() {
        match v.formal_index() {
            Some(k) if k <= args.len() => {}
            _ => {
                return Err(PolyError::ArityMismatch { var: v.to_string(), arity: args.len() })
            }
        }
    }
    Ok(p.substitute(|v| v.formal_index().map(|k| args[k - 1].clone())))
}

/// Polynomial assigned to each function and predicate symbol, over formals.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Interpretation {
    map: BTreeMap<Symbol, (usize, VPoly)>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sym: Symbol, arity: usize, poly: VPoly) {
        self.map.insert(sym, (arity, poly));
    }

    pub fn get(&self, sym: &Symbol) -> Option<&VPoly> {
        self.map.get(sym).map(|(_, p)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, usize, &VPoly)> {
        self.map.iter().map(|(s, (a, p))| (s, *a, p))
    }

    /// Replaces every unknown by its assigned value.
    pub fn instantiate(&self, a: &Assignment) -> Interpretation {
        Interpretation {
            map: self.map.iter().map(|(s, (n, p))| (s.clone(), (*n, p.instantiate(a)))).collect(),
        }
    }

    fn apply(&self, sym: &Symbol, args: &[Term]) -> Result<VPoly, PolyError> {
        let (arity, p) = self
            .map
            .get(sym)
            .ok_or_else(|| PolyError::Uninterpreted(sym.to_string()))?;
        if *arity != args.len() {
            return Err(PolyError::ArityMismatch { var: sym.to_string(), arity: args.len() });
        }
        let levels = args.iter().map(|t| self.level_map(t)).collect::<Result<Vec<_>, _>>()?;
        compose(p, &levels)
    }

    /// `|X| = X`, `|f(t1..tn)| = p_f(|t1|..|tn|)`.
    pub fn level_map(&self, t: &Term) -> Result<VPoly, PolyError> {
        match t {
            Term::Var(v) => Ok(VPoly::var(Var::new(v))),
            Term::Compound(f, args) => self.apply(f, args),
        }
    }

    pub fn level_map_atom(&self, a: &Atom) -> Result<VPoly, PolyError> {
        self.apply(&a.predicate, &a.args)
    }
}

/// Exact value under an assignment of unknowns and a valuation of variables.
pub fn eval(
    p: &VPoly,
    unknowns: &Assignment,
    vars: &BTreeMap<Var, u64>,
) -> Result<BigInt, PolyError> {
    p.eval_with(
        &|v: &Var| {
            vars.get(v).map(|&n| BigInt::from(n)).ok_or_else(|| PolyError::Unassigned(v.to_string()))
        },
        &|c: &UPoly| eval_upoly(c, unknowns),
    )
}

pub fn eval_upoly(p: &UPoly, a: &Assignment) -> Result<BigInt, PolyError> {
    p.eval_with(
        &|u| a.get(u).map(|&n| BigInt::from(n)).ok_or_else(|| PolyError::Unassigned(u.to_string())),
        &|c: &BigInt| Ok(c.clone()),
    )
}

/// Outcome of comparing two concrete polynomials on a finite grid.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CmpOutcome {
    /// `p > q` at every valuation.
    Gt,
    /// `p >= q` at every valuation, with equality somewhere.
    Ge,
    /// `p < q` at this valuation.
    Fails(BTreeMap<Var, u64>),
}

/// Iterates every valuation of `vars` over `{0..bound}`.
pub fn for_each_valuation(
    vars: &[Var],
    bound: u64,
    mut f: impl FnMut(&BTreeMap<Var, u64>) -> bool,
) -> bool {
    let mut val: BTreeMap<Var, u64> = vars.iter().map(|v| (v.clone(), 0)).collect();
    loop {
        if !f(&val) {
            return false;
        }
        let mut carry = true;
        for v in vars {
            let slot = val.get_mut(v).expect("valuation covers vars");
            if *slot < bound {
                *slot += 1;
                carry = false;
                break;
            }
            *slot = 0;
        }
        if carry {
            return true;
        }
    }
}

/// Compares `p` and `q` under `a` at all valuations of their variables in
/// `{0..bound}`. A finite test, not a proof over all naturals.
pub fn cmp_nat(p: &VPoly, q: &VPoly, a: &Assignment, bound: u64) -> Result<CmpOutcome, PolyError> {
    let diff = p.sub(q).instantiate(a);
    let vars: Vec<Var> = diff.vars().into_iter().collect();
    let mut strict = true;
    let mut failure = None;
    let mut error = None;
    for_each_valuation(&vars, bound, |val| match eval(&diff, a, val) {
        Ok(d) if d < BigInt::zero() => {
            failure = Some(val.clone());
            false
        }
        Ok(d) => {
            if d.is_zero() {
                strict = false;
            }
            true
        }
        Err(e) => {
            error = Some(e);
            false
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    Ok(match failure {
        Some(v) => CmpOutcome::Fails(v),
        None if strict => CmpOutcome::Gt,
        None => CmpOutcome::Ge,
    })
}

/// A concrete polynomial from integer coefficients, for tests and witnesses.
pub fn concrete(terms: &[(i64, &[(&str, u32)])]) -> VPoly {
    Poly::from_terms(terms.iter().map(|(c, m)| {
        (
            super::Monomial::from_powers(m.iter().map(|(v, e)| (Var::new(v), *e))),
            UPoly::int(*c),
        )
    }))
}
