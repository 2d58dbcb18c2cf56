//! End-to-end checks of call-set approximations and witnesses against
//! concrete LD-derivations.

mod common;

use common::ld::{Interpreter, Stop};
use common::{corpus_files, load, query_patterns, witness, Sampler, EXPECTED_YES};
use num_bigint::BigInt;
use polyterm::callset::{approximate_call_set, build_call_graph, Domain};
use polyterm::frontend::{Atom, Program, QuerySpec};
use polyterm::polyalg::{compose, eval, for_each_valuation, Assignment, Ring, VPoly, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const QUERIES: usize = 20;

/// Runs `QUERIES` sampled queries and hands each finished interpreter to `f`.
fn sampled_runs(p: &Program, q: &QuerySpec, seed: u64, mut f: impl FnMut(&Atom, Result<(), Stop>, &Interpreter)) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = Domain { grammar: &q.grammar, functions: &p.signature.functions };
    let mut sampler = Sampler::new(dom, 3);
    for pattern in query_patterns(q) {
        for _ in 0..QUERIES {
            let atom = Atom {
                predicate: pattern.predicate.clone(),
                args: pattern.args.iter().map(|a| sampler.sample(a, &mut rng, 0)).collect(),
            };
            let mut ld = Interpreter::new(p, 60, 200_000);
            let r = ld.run(&atom).map(|_| ());
            f(&atom, r, &ld);
        }
    }
}

#[test]
fn selected_atoms_are_covered_by_call_patterns() {
    for name in corpus_files() {
        let (p, q) = load(&name);
        let calls = approximate_call_set(&p, &q.patterns, &q.grammar);
        let dom = Domain { grammar: &q.grammar, functions: &p.signature.functions };
        let mut seen = 0;
        sampled_runs(&p, &q, 7, |query, _, ld| {
            for a in &ld.calls {
                seen += 1;
                assert!(
                    calls.iter().any(|c| dom.covers_atom(c, a)),
                    "{name}: call {a} from query {query} is outside the approximation"
                );
            }
        });
        assert!(seen > 0, "{name}: no calls recorded");
    }
}

#[test]
fn proved_programs_terminate_on_sampled_queries() {
    for name in EXPECTED_YES {
        let (p, q) = load(name);
        sampled_runs(&p, &q, 11, |query, r, _| {
            assert_eq!(r, Ok(()), "{name}: query {query} did not finish");
        });
    }
}

#[test]
fn loop_exceeds_the_depth_bound() {
    let (p, q) = load("loop.pl");
    sampled_runs(&p, &q, 3, |_, r, _| assert_eq!(r, Err(Stop::Depth)));
}

/// Checks a witness on concrete derivations: calls have constant levels,
/// recursive calls decrease, and answers satisfy the interargument relations.
#[test]
fn witnesses_hold_on_concrete_derivations() {
    let none = Assignment::new();
    let value = |v: &VPoly| -> BigInt {
        assert!(v.vars().is_empty(), "level {v} is not constant");
        v.constant_term().as_integer().expect("concrete")
    };
    for name in EXPECTED_YES {
        let (p, q, w) = witness(name);
        let graph = build_call_graph(&p);
        let level = |a: &Atom| w.interpretation.level_map_atom(a).expect("interpreted");
        let mut recursive_edges = 0;
        sampled_runs(&p, &q, 13, |query, r, ld| {
            assert_eq!(r, Ok(()), "{name}: {query}");
            for a in &ld.calls {
                value(&level(a));
            }
            for (parent, child) in &ld.edges {
                if graph.mutually_recursive(&parent.predicate, &child.predicate) {
                    recursive_edges += 1;
                    let (hi, lo) = (value(&level(parent)), value(&level(child)));
                    assert!(hi > lo, "{name}: |{parent}| = {hi} but |{child}| = {lo}");
                }
            }
            for ans in &ld.answers {
                let Some((i, o)) = w.interargs.get(&ans.predicate) else { continue };
                let args: Vec<VPoly> =
                    ans.args.iter().map(|t| w.interpretation.level_map(t).unwrap()).collect();
                let diff = compose(i, &args).unwrap().sub(&compose(o, &args).unwrap());
                let vars: Vec<Var> = diff.vars().into_iter().collect();
                let ok = for_each_valuation(&vars, 3, |val| {
                    eval(&diff, &none, val).unwrap() >= BigInt::from(0)
                });
                assert!(ok, "{name}: answer {ans} violates {i} >= {o}");
            }
        });
        assert!(recursive_edges > 0 || *name == "less.pl" || *name == "sub.pl", "{name}: no recursion seen");
    }
}
