use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Commutative ring of polynomial coefficients.
pub trait Ring: Clone + Eq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    /// The value as an integer, if it is a constant.
    fn as_integer(&self) -> Option<BigInt>;

    /// For a single term, whether it is negative and its negation-free form.
    fn split_sign(&self) -> Option<(bool, Self)>;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl Ring for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn as_integer(&self) -> Option<BigInt> {
        Some(self.clone())
    }
    fn split_sign(&self) -> Option<(bool, Self)> {
        Some((self.is_negative(), self.abs()))
    }
}

macro_rules! interned_name {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: &str) -> Self {
                $name(Arc::from(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.0)
            }
        }
    };
}

interned_name!(
    /// An unknown coefficient ranging over the naturals.
    Unknown
);
interned_name!(
    /// A program variable or a formal parameter `X1..Xn` of a template.
    Var
);

impl Var {
    /// The `k`-th formal parameter, 1-based.
    pub fn formal(k: usize) -> Self {
        Var::new(&format!("X{k}"))
    }

    /// Index of a formal parameter `Xk`.
    pub fn formal_index(&self) -> Option<usize> {
        let rest = self.0.strip_prefix('X')?;
        if rest.is_empty() || rest.starts_with('0') || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        rest.parse().ok()
    }
}

/// Power product of variables, sorted by variable with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial<V>(Vec<(V, u32)>);

impl<V: Ord + Clone> Monomial<V> {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: V) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_powers(powers: impl IntoIterator<Item = (V, u32)>) -> Self {
        let mut acc: BTreeMap<V, u32> = BTreeMap::new();
        for (v, e) in powers {
            if e > 0 {
                *acc.entry(v).or_default() += e;
            }
        }
        Monomial(acc.into_iter().collect())
    }

    pub fn powers(&self) -> &[(V, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: &V) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

impl<V: Ord> PartialOrd for Monomial<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded order: total degree first, then the power lists lexicographically.
impl<V: Ord> Ord for Monomial<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        let da: u32 = self.0.iter().map(|(_, e)| e).sum();
        let db: u32 = other.0.iter().map(|(_, e)| e).sum();
        da.cmp(&db).then_with(|| {
            // a variable that appears earlier (smaller) with a higher power ranks higher
            for ((va, ea), (vb, eb)) in self.0.iter().zip(&other.0) {
                match vb.cmp(va).then(ea.cmp(eb)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl<V: fmt::Display> fmt::Display for Monomial<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial with no zero coefficients stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly<V: Ord, C> {
    terms: BTreeMap<Monomial<V>, C>,
}

/// Polynomial over unknown coefficients with integer coefficients.
pub type UPoly = Poly<Unknown, BigInt>;
/// Polynomial over program variables with [`UPoly`] coefficients.
pub type VPoly = Poly<Var, UPoly>;

impl<V: Ord + Clone, C: Ring> Default for Poly<V, C> {
    fn default() -> Self {
        Poly { terms: BTreeMap::new() }
    }
}

impl<V: Ord + Clone, C: Ring> Poly<V, C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn var(v: V) -> Self {
        Self::term(C::one(), Monomial::var(v))
    }

    pub fn term(c: C, m: Monomial<V>) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial<V>, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial<V>, c: &C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.add(c);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial<V>, &C)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial<V>> {
        self.terms.keys()
    }

    pub fn coeff(&self, m: &Monomial<V>) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Monomial::one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<V> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| v.clone())).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &c.neg());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(m, x)| (m.clone(), x.mul(c))))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Replaces variables by polynomials simultaneously; unmapped variables stay.
    pub fn substitute(&self, mut f: impl FnMut(&V) -> Option<Self>) -> Self {
        let mut images: BTreeMap<V, Option<Self>> = BTreeMap::new();
        let mut powers: BTreeMap<(V, u32), Self> = BTreeMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut acc = Self::constant(c.clone());
            for (v, e) in &m.0 {
                let image = images.entry(v.clone()).or_insert_with(|| f(v));
                let factor = match image {
                    Some(p) => powers.entry((v.clone(), *e)).or_insert_with(|| p.pow(*e)).clone(),
                    None => Self::term(C::one(), Monomial(vec![(v.clone(), *e)])),
                };
                acc = acc.mul(&factor);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> Poly<V, D> {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

impl<V: Ord + Clone, C: Ring> Poly<V, C> {
    /// Exact value given integer images of variables and coefficients.
    pub fn eval_with<E>(
        &self,
        var: &impl Fn(&V) -> Result<BigInt, E>,
        coeff: &impl Fn(&C) -> Result<BigInt, E>,
    ) -> Result<BigInt, E> {
        let mut total = <BigInt as Zero>::zero();
        for (m, c) in &self.terms {
            let mut t = coeff(c)?;
            if Zero::is_zero(&t) {
                continue;
            }
            for (v, e) in &m.0 {
                t *= num_traits::pow(var(v)?, *e as usize);
            }
            total += t;
        }
        Ok(total)
    }
}

impl<V: Ord + Clone + fmt::Debug, C: Ring> Ring for Poly<V, C> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::one()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_term().is_one()
    }
    fn add(&self, other: &Self) -> Self {
        Poly::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Poly::mul(self, other)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn as_integer(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(<BigInt as Zero>::zero()),
            1 => self.terms.get(&Monomial::one()).and_then(C::as_integer),
            _ => None,
        }
    }
    fn split_sign(&self) -> Option<(bool, Self)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        let (neg, abs) = c.split_sign()?;
        Some((neg, Poly::term(abs, m.clone())))
    }
}

impl UPoly {
    pub fn unknown(u: Unknown) -> Self {
        Poly::var(u)
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(BigInt::from(n))
    }
}

impl VPoly {
    /// A constant polynomial whose value is the given unknown.
    pub fn unknown(u: Unknown) -> Self {
        Poly::constant(UPoly::unknown(u))
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(UPoly::int(n))
    }

    pub fn unknowns(&self) -> BTreeSet<Unknown> {
        self.terms().flat_map(|(_, c)| c.vars()).collect()
    }

    /// Replaces unknowns by their assigned values; unassigned unknowns stay symbolic.
    pub fn instantiate(&self, a: &super::Assignment) -> VPoly {
        self.map_coeffs(|c| {
            c.substitute(|u| a.get(u).map(|&n| UPoly::constant(BigInt::from(n))))
        })
    }
}

/// Sign, magnitude text, whether the magnitude is 1, and whether it is a
/// single term (printable without parentheses).
fn signed_parts<C: Ring + fmt::Display>(c: &C) -> (bool, String, bool, bool) {
    match c.split_sign() {
        Some((neg, abs)) => (neg, abs.to_string(), abs.is_one(), true),
        None => (false, c.to_string(), false, false),
    }
}

impl<V: Ord + Clone + fmt::Display, C: Ring + fmt::Display> fmt::Display for Poly<V, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, text, unit, atomic) = signed_parts(c);
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                if atomic {
                    write!(f, "{text}")?;
                } else {
                    write!(f, "({text})")?;
                }
            } else if unit {
                write!(f, "{m}")?;
            } else if atomic {
                write!(f, "{text}*{m}")?;
            } else {
                write!(f, "({text})*{m}")?;
            }
        }
        Ok(())
    }
}
