//! Shared helpers for the integration tests: corpus loading, random terms
//! drawn from abstract values, and a concrete LD interpreter.

#![allow(dead_code)]

pub mod ld;
pub mod props;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use polyterm::callset::{AbsVal, CallPattern, Domain};
use polyterm::frontend::{parse_query_spec, parse_source, ArgMode, Program, QuerySpec, Symbol, Term};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Corpus file names, sorted.
pub fn corpus_files() -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".pl"))
        .collect();
    names.sort();
    names
}

pub fn load(name: &str) -> (Program, QuerySpec) {
    let text = fs::read_to_string(corpus_dir().join(name)).expect("corpus file");
    let src = parse_source(&text).expect("corpus parses");
    let spec = parse_query_spec(&src.annotations, &src.program).expect("corpus annotations");
    (src.program, spec)
}

pub fn query_patterns(spec: &QuerySpec) -> Vec<CallPattern> {
    spec.patterns
        .iter()
        .map(|q| CallPattern {
            predicate: q.predicate.clone(),
            args: q
                .modes
                .iter()
                .map(|m| match m {
                    ArgMode::Ground => AbsVal::Ground,
                    ArgMode::Any => AbsVal::Any,
                    ArgMode::Typed(t) => AbsVal::Named(t.clone()),
                })
                .collect(),
        })
        .collect()
}

/// Draws concrete terms from abstract values.
pub struct Sampler<'a> {
    pub dom: Domain<'a>,
    pub max_depth: usize,
    fresh: usize,
}

impl<'a> Sampler<'a> {
    pub fn new(dom: Domain<'a>, max_depth: usize) -> Self {
        Sampler { dom, max_depth, fresh: 0 }
    }

    pub fn fresh_var(&mut self) -> Term {
        self.fresh += 1;
        Term::var(&format!("V{}", self.fresh))
    }

    pub fn ground(&mut self, rng: &mut impl Rng, depth: usize) -> Term {
        let syms: Vec<(&Symbol, usize)> = self.dom.functions.iter().map(|(f, &n)| (f, n)).collect();
        let leaves: Vec<(&Symbol, usize)> = syms.iter().copied().filter(|s| s.1 == 0).collect();
        let (f, n) = if depth >= self.max_depth || rng.gen_bool(0.3) {
            *leaves.choose(rng).expect("the program has a constant")
        } else {
            *syms.choose(rng).expect("a function symbol")
        };
        let args = (0..n).map(|_| self.ground(rng, depth + 1)).collect();
        Term::Compound(f.clone(), args)
    }

    /// Any term; variables are fresh.
    pub fn any(&mut self, rng: &mut impl Rng, depth: usize) -> Term {
        if depth >= self.max_depth || rng.gen_bool(0.4) {
            return self.fresh_var();
        }
        let syms: Vec<(&Symbol, usize)> = self.dom.functions.iter().map(|(f, &n)| (f, n)).collect();
        let Some(&(f, n)) = syms.choose(rng) else { return self.fresh_var() };
        let args = (0..n).map(|_| self.any(rng, depth + 1)).collect();
        Term::Compound(f.clone(), args)
    }

    pub fn sample(&mut self, v: &AbsVal, rng: &mut impl Rng, depth: usize) -> Term {
        match v {
            AbsVal::Any => self.any(rng, depth),
            AbsVal::Ground => self.ground(rng, depth),
            AbsVal::Struct(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.sample(a, rng, depth + 1)).collect())
            }
            AbsVal::Named(_) => {
                let alts = self.dom.alternatives(v);
                let shallow: Vec<&AbsVal> = alts
                    .iter()
                    .filter(|a| !matches!(a, AbsVal::Struct(_, xs) if !xs.is_empty()))
                    .collect();
                let pick = if depth >= self.max_depth && !shallow.is_empty() {
                    shallow.choose(rng).copied().cloned()
                } else {
                    alts.choose(rng).cloned()
                };
                match pick {
                    Some(a) => self.sample(&a, rng, depth + 1),
                    None => self.fresh_var(),
                }
            }
        }
    }
}

/// Applies a substitution to a term.
pub fn apply(t: &Term, s: &BTreeMap<String, Term>) -> Term {
    t.map_vars(&mut |v| s.get(v).cloned().unwrap_or_else(|| Term::var(v)))
}

/// Corpus programs the prover is expected to handle.
pub const EXPECTED_YES: &[&str] = &[
    "append.pl",
    "der.pl",
    "div.pl",
    "even_odd.pl",
    "flatten.pl",
    "hanoi.pl",
    "last.pl",
    "length.pl",
    "less.pl",
    "member.pl",
    "nrev.pl",
    "permute.pl",
    "plus.pl",
    "quicksort.pl",
    "reverse_acc.pl",
    "sub.pl",
    "times.pl",
    "tree_insert.pl",
];

/// Proves a corpus program that must come out YES and returns its witness.
pub fn witness(name: &str) -> (Program, QuerySpec, polyterm::driver::Witness) {
    use polyterm::driver::{prove, Config, Outcome};
    let (p, q) = load(name);
    let v = prove(&p, &q, &Config::default());
    match v.outcome {
        Outcome::Yes(w) => (p, q, *w),
        other => panic!("{name}: expected YES, got {other:?}"),
    }
}
