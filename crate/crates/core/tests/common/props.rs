//! Proptest strategies for polynomials, terms, conditional constraints and
//! small Diophantine systems.

use num_bigint::BigInt;
use polyterm::congen::{CondConstraint, CondKind, DioConstraint, DioSystem, Ineq, Origin, Relation};
use polyterm::frontend::{Symbol, Term};
use polyterm::polyalg::{Interpretation, Monomial, Poly, UPoly, Unknown, VPoly, Var};
use proptest::prelude::*;
use proptest::test_runner::{Config, FileFailurePersistence, RngAlgorithm, TestRng, TestRunner};

/// A deterministic runner for `cases` cases.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: Some(Box::new(FileFailurePersistence::Off)),
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn monomial<V: Clone + Ord + std::fmt::Debug>(names: &'static [&'static str], max_exp: u32, mk: fn(&str) -> V) -> impl Strategy<Value = Monomial<V>> {
    proptest::collection::vec(0..=max_exp, names.len()).prop_map(move |exps| {
        Monomial::from_powers(
            names.iter().zip(exps).filter(|(_, e)| *e > 0).map(|(n, e)| (mk(n), e)),
        )
    })
}

pub fn upoly() -> impl Strategy<Value = UPoly> {
    proptest::collection::vec((monomial(&["a", "b", "c"], 2, Unknown::new), -4i64..=4), 0..5)
        .prop_map(|ts| Poly::from_terms(ts.into_iter().map(|(m, c)| (m, BigInt::from(c)))))
}

pub fn vpoly() -> impl Strategy<Value = VPoly> {
    proptest::collection::vec((monomial(&["X", "Y", "Z"], 2, Var::new), upoly()), 0..4)
        .prop_map(Poly::from_terms)
}

/// Natural-coefficient polynomial in `vars` of degree at most `deg`.
pub fn nat_vpoly(vars: &'static [&'static str], deg: u32, max_coeff: i64) -> impl Strategy<Value = VPoly> {
    proptest::collection::vec((monomial(vars, deg, Var::new), 0..=max_coeff), 0..4).prop_map(move |ts| {
        Poly::from_terms(
            ts.into_iter()
                .filter(|(m, _)| m.degree() <= deg)
                .map(|(m, c)| (m, UPoly::int(c))),
        )
    })
}

/// Symbols `f/2`, `g/1`, `a/0`, `b/0`.
pub const SIG: &[(&str, usize)] = &[("f", 2), ("g", 1), ("a", 0), ("b", 0)];

fn formals(n: usize) -> &'static [&'static str] {
    &["X1", "X2"][..n]
}

/// A concrete interpretation of [`SIG`] with natural coefficients.
pub fn interpretation() -> impl Strategy<Value = Interpretation> {
    let polys: Vec<_> = SIG.iter().map(|&(_, n)| nat_vpoly(formals(n), 2, 3)).collect();
    polys.prop_map(|ps| {
        let mut i = Interpretation::new();
        for (&(s, n), p) in SIG.iter().zip(ps) {
            i.insert(Symbol::new(s), n, p);
        }
        i
    })
}

/// A term over [`SIG`] and the given variables.
pub fn term(vars: &'static [&'static str]) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        proptest::sample::select(vars).prop_map(Term::var),
        Just(Term::constant("a")),
        Just(Term::constant("b")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("g", vec![t])),
            (inner.clone(), inner).prop_map(|(s, t)| Term::app("f", vec![s, t])),
        ]
    })
}

fn ineq() -> impl Strategy<Value = Ineq> {
    (nat_vpoly(&["X", "Y"], 2, 3), nat_vpoly(&["X", "Y"], 2, 3)).prop_map(|(lhs, rhs)| Ineq { lhs, rhs })
}

/// `premises => conclusion` with up to three premises.
pub fn cond_constraint() -> impl Strategy<Value = CondConstraint> {
    (proptest::collection::vec(ineq(), 0..=3), ineq()).prop_map(|(premises, conclusion)| {
        CondConstraint { premises, conclusion, kind: CondKind::Interargument { clause: 0 } }
    })
}

/// A system over at most six unknowns with domain `{0,1,2}`.
pub fn dio_system() -> impl Strategy<Value = DioSystem> {
    let names: &'static [&'static str] = &["u0", "u1", "u2", "u3", "u4", "u5"];
    (1usize..=6).prop_flat_map(move |n| {
        let term = (proptest::collection::vec(0u32..=2, n), -3i64..=3);
        let poly = proptest::collection::vec(term, 1..=4).prop_map(move |ts| {
            Poly::from_terms(ts.into_iter().map(|(exps, c)| {
                // cap total degree at 4
                let mut left = 4;
                let powers: Vec<(Unknown, u32)> = names[..n]
                    .iter()
                    .zip(exps)
                    .map(|(u, e)| {
                        let e = e.min(left);
                        left -= e;
                        (Unknown::new(u), e)
                    })
                    .filter(|(_, e)| *e > 0)
                    .collect();
                (Monomial::from_powers(powers), BigInt::from(c))
            }))
        });
        let rel = prop_oneof![Just(Relation::Geq0), Just(Relation::Eq0), Just(Relation::Gt0)];
        proptest::collection::vec((poly, rel), 1..=5).prop_map(move |cs| {
            let mut s = DioSystem::default();
            for u in &names[..n] {
                s.register(&Unknown::new(u), 2);
            }
            for (poly, relation) in cs {
                s.push(DioConstraint { poly, relation, origin: Origin::Text("random".into()) });
            }
            s
        })
    })
}
