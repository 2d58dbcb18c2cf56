//! Checks a witness against the termination conditions directly, without the
//! implication-removal and coefficient-extraction steps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::Witness;
use crate::callset::{
    approximate_call_set, build_call_graph, critical_paths, pattern_to_type_graph, NodeLabel,
};
use crate::congen::{gen_decrease, gen_interargument, CondConstraint, Ineq};
use crate::frontend::{Program, QuerySpec};
use crate::polyalg::{eval, Assignment, PolyError, Ring, VPoly, Var};

/// Valuation grids above this many points are sampled instead.
const EXHAUSTIVE_LIMIT: u64 = 1 << 20;
const SAMPLES: u64 = 1 << 18;

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct VerifySummary {
    pub bound: u64,
    pub critical_paths: usize,
    pub conditions: usize,
    pub valuations: u64,
    /// Some condition had too many variables for the full grid and was sampled.
    pub sampled: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum VerifyFailure {
    #[error("call pattern {pattern} is not rigid: critical path {path} has no cut arc")]
    NotRigid { pattern: String, path: usize },
    #[error("{condition} fails at {valuation}")]
    Condition { condition: String, valuation: Valuation },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Values of clause variables at a counterexample.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Valuation(pub BTreeMap<Var, u64>);

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("every valuation");
        }
        let parts: Vec<String> = self.0.iter().map(|(v, n)| format!("{v}={n}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// A concrete polynomial compiled over variable indices.
struct Compiled {
    terms: Vec<(i128, Vec<(usize, u32)>)>,
}

impl Compiled {
    fn new(p: &VPoly, vars: &[Var]) -> Result<Compiled, PolyError> {
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            let c = c
                .as_integer()
                .and_then(|c| i128::try_from(c).ok())
                .ok_or_else(|| PolyError::Unassigned(c.to_string()))?;
            let powers = m
                .powers()
                .iter()
                .map(|(v, e)| (vars.binary_search(v).expect("variable listed"), *e))
                .collect();
            terms.push((c, powers));
        }
        Ok(Compiled { terms })
    }

    fn eval(&self, point: &[u64]) -> Option<i128> {
        let mut sum = 0i128;
        for (c, powers) in &self.terms {
            let mut t = *c;
            for &(v, e) in powers {
                t = t.checked_mul(i128::from(point[v]).checked_pow(e)?)?;
            }
            sum = sum.checked_add(t)?;
        }
        Some(sum)
    }
}

struct Check {
    pairs: Vec<(Compiled, Compiled, VPoly, VPoly)>,
    vars: Vec<Var>,
}

impl Check {
    fn new(c: &CondConstraint) -> Result<Check, PolyError> {
        let mut vars = BTreeSet::new();
        for i in c.premises.iter().chain([&c.conclusion]) {
            vars.extend(i.lhs.vars());
            vars.extend(i.rhs.vars());
        }
        let vars: Vec<Var> = vars.into_iter().collect();
        let pairs = c
            .premises
            .iter()
            .chain([&c.conclusion])
            .map(|Ineq { lhs, rhs }| {
                Ok((Compiled::new(lhs, &vars)?, Compiled::new(rhs, &vars)?, lhs.clone(), rhs.clone()))
            })
            .collect::<Result<_, PolyError>>()?;
        Ok(Check { pairs, vars })
    }

    fn holds(&self, k: usize, point: &[u64]) -> bool {
        let (l, r, lp, rp) = &self.pairs[k];
        match (l.eval(point), r.eval(point)) {
            (Some(a), Some(b)) => a >= b,
            _ => {
                // too large for i128; fall back to exact arithmetic
                let val: BTreeMap<Var, u64> =
                    self.vars.iter().cloned().zip(point.iter().copied()).collect();
                let none = Assignment::new();
                let a: BigInt = eval(lp, &none, &val).expect("concrete polynomial");
                let b: BigInt = eval(rp, &none, &val).expect("concrete polynomial");
                a >= b
            }
        }
    }

    /// `premises => conclusion` at `point`.
    fn implication(&self, point: &[u64]) -> bool {
        let n = self.pairs.len() - 1;
        !(0..n).all(|k| self.holds(k, point)) || self.holds(n, point)
    }

    fn counterexample(&self, point: &[u64]) -> Valuation {
        Valuation(self.vars.iter().cloned().zip(point.iter().copied()).collect())
    }
}

/// Checks `c` on `{0..bound}` for every variable; returns the points visited
/// and whether they were sampled.
fn check_condition(c: &CondConstraint, bound: u64) -> Result<(u64, bool), VerifyFailure> {
    let check = Check::new(c)?;
    let n = check.vars.len() as u32;
    let fail = |point: &[u64]| VerifyFailure::Condition {
        condition: c.kind.to_string(),
        valuation: check.counterexample(point),
    };
    let grid = (bound + 1).checked_pow(n).filter(|&g| g <= EXHAUSTIVE_LIMIT);
    let mut point = vec![0u64; n as usize];
    match grid {
        Some(total) => {
            for _ in 0..total {
                if !check.implication(&point) {
                    return Err(fail(&point));
                }
                for slot in point.iter_mut() {
                    if *slot < bound {
                        *slot += 1;
                        break;
                    }
                    *slot = 0;
                }
            }
            Ok((total, false))
        }
        None => {
            // corners first, then a fixed pseudo-random sample
            for corner in [0, bound] {
                point.iter_mut().for_each(|p| *p = corner);
                if !check.implication(&point) {
                    return Err(fail(&point));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..SAMPLES {
                point.iter_mut().for_each(|p| *p = rng.gen_range(0..=bound));
                if !check.implication(&point) {
                    return Err(fail(&point));
                }
            }
            Ok((SAMPLES + 2, true))
        }
    }
}

/// Re-derives rigidity, interargument and decrease conditions from the
/// witness and checks them: rigidity exactly, implications on every
/// valuation of clause variables in `{0..bound}`.
pub fn verify_witness(
    program: &Program,
    queries: &QuerySpec,
    w: &Witness,
    bound: u64,
) -> Result<VerifySummary, VerifyFailure> {
    let calls = approximate_call_set(program, &queries.patterns, &queries.grammar);
    let mut paths = 0;
    for pattern in &calls {
        let g = pattern_to_type_graph(pattern, &program.signature.functions, &queries.grammar);
        for (k, path) in critical_paths(&g).iter().enumerate() {
            paths += 1;
            let cut = path.steps.iter().any(|step| {
                let (NodeLabel::Sym(f), Some(pos)) = (&g.labels[step.from], step.argpos) else {
                    return false;
                };
                let x = Var::formal(pos);
                w.interpretation
                    .get(f)
                    .is_some_and(|p| p.monomials().all(|m| m.exponent(&x) == 0))
            });
            if !cut {
                return Err(VerifyFailure::NotRigid { pattern: pattern.to_string(), path: k + 1 });
            }
        }
    }

    let graph = build_call_graph(program);
    let mut conds = gen_interargument(program, &w.interpretation, &w.interargs, None)?;
    conds.extend(gen_decrease(program, &graph, &w.interpretation, &w.interargs)?);
    let mut valuations = 0;
    let mut sampled = false;
    for c in &conds {
        let (n, s) = check_condition(c, bound)?;
        valuations += n;
        sampled |= s;
    }
    Ok(VerifySummary { bound, critical_paths: paths, conditions: conds.len(), valuations, sampled })
}
