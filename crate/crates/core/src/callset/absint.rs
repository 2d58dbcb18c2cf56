//! Abstract interpretation of left-to-right execution over abstract terms.

use std::collections::BTreeMap;
use std::fmt;

use crate::frontend::{
    ArgMode, Atom, Clause, Program, QueryPattern, Symbol, Term, TypeExpr, TypeGrammar,
};

/// A set of terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AbsVal {
    /// Every term, including variables.
    Any,
    /// Every ground term over the program's function symbols.
    Ground,
    /// The terms described by a grammar rule.
    Named(String),
    /// Terms with the given principal functor and arguments.
    Struct(Symbol, Vec<AbsVal>),
}

impl fmt::Display for AbsVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsVal::Any => write!(f, "any"),
            AbsVal::Ground => write!(f, "ground"),
            AbsVal::Named(t) => write!(f, "{t}"),
            AbsVal::Struct(s, args) if args.is_empty() => write!(f, "{s}"),
            AbsVal::Struct(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An abstract call: the predicate and one abstract value per argument.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CallPattern {
    pub predicate: Symbol,
    pub args: Vec<AbsVal>,
}

impl fmt::Display for CallPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Nesting depth beyond which structure is widened away.
const MAX_DEPTH: usize = 3;
/// Patterns kept per predicate before they are merged into one.
const MAX_PATTERNS: usize = 12;
/// Rounds of the fixpoint iteration before giving up on precision.
const MAX_ROUNDS: usize = 500;

/// Lattice operations relative to a grammar and a set of function symbols.
pub struct Domain<'a> {
    pub grammar: &'a TypeGrammar,
    pub functions: &'a BTreeMap<Symbol, usize>,
}

pub(crate) fn alt_val(e: &TypeExpr) -> AbsVal {
    match e {
        TypeExpr::Any => AbsVal::Any,
        TypeExpr::Ground => AbsVal::Ground,
        TypeExpr::Ref(r) => AbsVal::Named(r.clone()),
        TypeExpr::Fun(f, args) => AbsVal::Struct(f.clone(), args.iter().map(alt_val).collect()),
    }
}

impl Domain<'_> {
    /// Alternatives of a `Named` or `Ground` value as abstract values.
    pub fn alternatives(&self, v: &AbsVal) -> Vec<AbsVal> {
        match v {
            AbsVal::Named(t) => self.grammar.alternatives(t).iter().map(alt_val).collect(),
            AbsVal::Ground => self
                .functions
                .iter()
                .map(|(f, &n)| AbsVal::Struct(f.clone(), vec![AbsVal::Ground; n]))
                .collect(),
            other => vec![other.clone()],
        }
    }

    pub fn is_ground(&self, v: &AbsVal) -> bool {
        match v {
            AbsVal::Any => false,
            AbsVal::Ground => true,
            AbsVal::Named(t) => self.grammar.is_ground(t),
            AbsVal::Struct(_, args) => args.iter().all(|a| self.is_ground(a)),
        }
    }

    /// Set inclusion; `false` when inclusion cannot be established.
    pub fn leq(&self, a: &AbsVal, b: &AbsVal) -> bool {
        self.leq_in(a, b, &mut Vec::new())
    }

    fn leq_in(&self, a: &AbsVal, b: &AbsVal, assumed: &mut Vec<(AbsVal, AbsVal)>) -> bool {
        if a == b || *b == AbsVal::Any {
            return true;
        }
        if assumed.iter().any(|(x, y)| x == a && y == b) {
            return true;
        }
        match (a, b) {
            (AbsVal::Named(_), _) | (AbsVal::Ground, _) => {
                assumed.push((a.clone(), b.clone()));
                let ok = self.alternatives(a).iter().all(|alt| self.leq_in(alt, b, assumed));
                assumed.pop();
                ok
            }
            (AbsVal::Any, AbsVal::Named(_)) => {
                assumed.push((a.clone(), b.clone()));
                let ok = self.alternatives(b).iter().any(|alt| self.leq_in(a, alt, assumed));
                assumed.pop();
                ok
            }
            (AbsVal::Any, _) => false,
            (AbsVal::Struct(_, xs), AbsVal::Ground) => {
                xs.iter().all(|x| self.leq_in(x, &AbsVal::Ground, assumed))
            }
            (AbsVal::Struct(f, xs), AbsVal::Struct(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| self.leq_in(x, y, assumed))
            }
            (AbsVal::Struct(..), AbsVal::Named(_)) => {
                self.alternatives(b).iter().any(|alt| self.leq_in(a, alt, assumed))
            }
            (AbsVal::Struct(..), AbsVal::Any) => true,
        }
    }

    /// An upper bound of both arguments.
    pub fn lub(&self, a: &AbsVal, b: &AbsVal) -> AbsVal {
        if self.leq(a, b) {
            return b.clone();
        }
        if self.leq(b, a) {
            return a.clone();
        }
        match (a, b) {
            (AbsVal::Struct(f, xs), AbsVal::Struct(g, ys)) if f == g && xs.len() == ys.len() => {
                AbsVal::Struct(f.clone(), xs.iter().zip(ys).map(|(x, y)| self.lub(x, y)).collect())
            }
            _ if self.is_ground(a) && self.is_ground(b) => AbsVal::Ground,
            _ => AbsVal::Any,
        }
    }

    /// An upper bound of the intersection; `None` if it is certainly empty.
    pub fn meet(&self, a: &AbsVal, b: &AbsVal) -> Option<AbsVal> {
        if self.leq(a, b) {
            return Some(a.clone());
        }
        if self.leq(b, a) {
            return Some(b.clone());
        }
        match (a, b) {
            (AbsVal::Struct(f, xs), AbsVal::Struct(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                let args = xs.iter().zip(ys).map(|(x, y)| self.meet(x, y)).collect::<Option<_>>()?;
                Some(AbsVal::Struct(f.clone(), args))
            }
            (AbsVal::Struct(f, xs), AbsVal::Ground) | (AbsVal::Ground, AbsVal::Struct(f, xs)) => {
                if self.functions.get(f) != Some(&xs.len()) {
                    return None;
                }
                let args =
                    xs.iter().map(|x| self.meet(x, &AbsVal::Ground)).collect::<Option<_>>()?;
                Some(AbsVal::Struct(f.clone(), args))
            }
            (s @ AbsVal::Struct(f, xs), n @ AbsVal::Named(_))
            | (n @ AbsVal::Named(_), s @ AbsVal::Struct(f, xs)) => {
                let alts = self.alternatives(n);
                let open = alts.iter().any(|x| !matches!(x, AbsVal::Struct(..)));
                let same: Vec<&AbsVal> = alts
                    .iter()
                    .filter(|x| matches!(x, AbsVal::Struct(g, ys) if g == f && ys.len() == xs.len()))
                    .collect();
                match (same.len(), open) {
                    (0, false) => None,
                    (1, false) => self.meet(s, same[0]),
                    _ => Some(s.clone()),
                }
            }
            (AbsVal::Ground, AbsVal::Named(t)) | (AbsVal::Named(t), AbsVal::Ground) => {
                if self.grammar.is_ground(t) {
                    Some(AbsVal::Named(t.clone()))
                } else {
                    Some(AbsVal::Ground)
                }
            }
            _ => Some(a.clone()),
        }
    }

    /// Widens structure nested deeper than the depth bound.
    pub fn normalize(&self, v: &AbsVal) -> AbsVal {
        self.normalize_at(v, 0)
    }

    fn normalize_at(&self, v: &AbsVal, depth: usize) -> AbsVal {
        match v {
            AbsVal::Struct(f, args) => {
                if depth >= MAX_DEPTH {
                    if self.is_ground(v) {
                        AbsVal::Ground
                    } else {
                        AbsVal::Any
                    }
                } else {
                    AbsVal::Struct(
                        f.clone(),
                        args.iter().map(|a| self.normalize_at(a, depth + 1)).collect(),
                    )
                }
            }
            other => other.clone(),
        }
    }

    /// True if the concrete term `t` belongs to the set denoted by `v`.
    pub fn covers(&self, v: &AbsVal, t: &Term) -> bool {
        self.covers_in(v, t, 0)
    }

    fn covers_in(&self, v: &AbsVal, t: &Term, depth: usize) -> bool {
        if depth > 10_000 {
            return false;
        }
        match (v, t) {
            (AbsVal::Any, _) => true,
            (_, Term::Var(_)) => match v {
                AbsVal::Named(_) => {
                    self.alternatives(v).iter().any(|a| *a == AbsVal::Any
                        || (matches!(a, AbsVal::Named(_)) && self.covers_in(a, t, depth + 1)))
                }
                _ => false,
            },
            (AbsVal::Ground, Term::Compound(f, args)) => {
                self.functions.get(f) == Some(&args.len())
                    && args.iter().all(|a| self.covers_in(&AbsVal::Ground, a, depth + 1))
            }
            (AbsVal::Struct(g, vs), Term::Compound(f, args)) => {
                f == g
                    && vs.len() == args.len()
                    && vs.iter().zip(args).all(|(v, a)| self.covers_in(v, a, depth + 1))
            }
            (AbsVal::Named(_), Term::Compound(..)) => {
                self.alternatives(v).iter().any(|a| self.covers_in(a, t, depth + 1))
            }
        }
    }

    fn pattern_leq(&self, a: &[AbsVal], b: &[AbsVal]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.leq(x, y))
    }

    fn pattern_lub(&self, a: &[AbsVal], b: &[AbsVal]) -> Vec<AbsVal> {
        a.iter().zip(b).map(|(x, y)| self.lub(x, y)).collect()
    }

    /// True if the concrete atom is an instance of the pattern.
    pub fn covers_atom(&self, p: &CallPattern, a: &Atom) -> bool {
        p.predicate == a.predicate
            && p.args.len() == a.args.len()
            && p.args.iter().zip(&a.args).all(|(v, t)| self.covers(v, t))
    }
}

type Env = BTreeMap<String, AbsVal>;

struct Analysis<'a> {
    dom: Domain<'a>,
    program: &'a Program,
    calls: BTreeMap<Symbol, Vec<Vec<AbsVal>>>,
    succ: BTreeMap<(Symbol, Vec<AbsVal>), Vec<AbsVal>>,
    changed: bool,
}

impl Analysis<'_> {
    fn eval(&self, t: &Term, env: &Env) -> AbsVal {
        match t {
            Term::Var(v) => env.get(v).cloned().unwrap_or(AbsVal::Any),
            Term::Compound(f, args) => {
                AbsVal::Struct(f.clone(), args.iter().map(|a| self.eval(a, env)).collect())
            }
        }
    }

    /// Refines `env` so that `t` lies in `v`; false if that is impossible.
    fn unify(&self, t: &Term, v: &AbsVal, env: &mut Env) -> bool {
        match t {
            Term::Var(x) => {
                let refined = match env.get(x) {
                    Some(old) => match self.dom.meet(old, v) {
                        Some(m) => m,
                        None => return false,
                    },
                    None => v.clone(),
                };
                env.insert(x.clone(), refined);
                true
            }
            Term::Compound(f, ts) => {
                let Some(args) = self.split(f, ts.len(), v) else {
                    return false;
                };
                ts.iter().zip(&args).all(|(t, a)| self.unify(t, a, env))
            }
        }
    }

    /// Argument values of `v` restricted to principal functor `f/n`.
    fn split(&self, f: &Symbol, n: usize, v: &AbsVal) -> Option<Vec<AbsVal>> {
        self.split_in(f, n, v, &mut Vec::new())
    }

    fn split_in(
        &self,
        f: &Symbol,
        n: usize,
        v: &AbsVal,
        seen: &mut Vec<String>,
    ) -> Option<Vec<AbsVal>> {
        match v {
            AbsVal::Any => Some(vec![AbsVal::Any; n]),
            AbsVal::Ground => {
                (self.dom.functions.get(f) == Some(&n)).then(|| vec![AbsVal::Ground; n])
            }
            AbsVal::Struct(g, vs) => (g == f && vs.len() == n).then(|| vs.clone()),
            AbsVal::Named(t) => {
                if seen.contains(t) {
                    return None;
                }
                seen.push(t.clone());
                let mut acc: Option<Vec<AbsVal>> = None;
                for alt in self.dom.alternatives(v) {
                    if let Some(args) = self.split_in(f, n, &alt, seen) {
                        acc = Some(match acc {
                            None => args,
                            Some(prev) => self.dom.pattern_lub(&prev, &args),
                        });
                    }
                }
                seen.pop();
                acc
            }
        }
    }

    /// Registers a call and returns the pattern covering it.
    fn add_call(&mut self, pred: &Symbol, args: Vec<AbsVal>) -> Vec<AbsVal> {
        let list = self.calls.entry(pred.clone()).or_default();
        if let Some(p) = list.iter().find(|p| self.dom.pattern_leq(&args, p)) {
            return p.clone();
        }
        self.changed = true;
        list.retain(|p| !self.dom.pattern_leq(p, &args));
        list.push(args.clone());
        if list.len() > MAX_PATTERNS {
            let merged = list[1..]
                .iter()
                .fold(list[0].clone(), |acc, p| self.dom.pattern_lub(&acc, p));
            *list = vec![merged.clone()];
            return merged;
        }
        args
    }

    fn succ_of(&self, pred: &Symbol, args: &[AbsVal]) -> Option<Vec<AbsVal>> {
        let cover = self.calls.get(pred)?.iter().find(|p| self.dom.pattern_leq(args, p))?;
        self.succ.get(&(pred.clone(), cover.clone())).cloned()
    }

    /// Abstractly runs `clause` on a call; returns the head on success.
    fn run_clause(&mut self, clause: &Clause, call: &[AbsVal]) -> Option<Vec<AbsVal>> {
        let mut env = Env::new();
        for (t, v) in clause.head.args.iter().zip(call) {
            if !self.unify(t, v, &mut env) {
                return None;
            }
        }
        for b in &clause.body {
            let args: Vec<AbsVal> =
                b.args.iter().map(|t| self.dom.normalize(&self.eval(t, &env))).collect();
            let cover = self.add_call(&b.predicate, args.clone());
            let answer = self.succ_of(&b.predicate, &cover)?;
            for (t, v) in b.args.iter().zip(&answer) {
                if !self.unify(t, v, &mut env) {
                    return None;
                }
            }
        }
        Some(clause.head.args.iter().map(|t| self.dom.normalize(&self.eval(t, &env))).collect())
    }

    fn round(&mut self) {
        let preds: Vec<Symbol> = self.calls.keys().cloned().collect();
        for p in preds {
            let patterns = self.calls.get(&p).cloned().unwrap_or_default();
            for call in patterns {
                // a pattern may have been merged away during this round
                if !self.calls.get(&p).is_some_and(|l| l.contains(&call)) {
                    continue;
                }
                for (_, clause) in self.program.clauses_of(&p) {
                    let Some(head) = self.run_clause(clause, &call) else {
                        continue;
                    };
                    let key = (p.clone(), call.clone());
                    let next = match self.succ.get(&key) {
                        Some(prev) => self.dom.pattern_lub(prev, &head),
                        None => head,
                    };
                    if self.succ.get(&key) != Some(&next) {
                        self.succ.insert(key, next);
                        self.changed = true;
                    }
                }
            }
        }
    }
}

/// Finite over-approximation of the atoms selected by left-to-right
/// resolution from the given queries.
pub fn approximate_call_set(
    program: &Program,
    queries: &[QueryPattern],
    grammar: &TypeGrammar,
) -> Vec<CallPattern> {
    let mut a = Analysis {
        dom: Domain { grammar, functions: &program.signature.functions },
        program,
        calls: BTreeMap::new(),
        succ: BTreeMap::new(),
        changed: false,
    };
    for q in queries {
        let args = q
            .modes
            .iter()
            .map(|m| match m {
                ArgMode::Ground => AbsVal::Ground,
                ArgMode::Any => AbsVal::Any,
                ArgMode::Typed(t) => AbsVal::Named(t.clone()),
            })
            .collect();
        a.add_call(&q.predicate, args);
    }
    let mut rounds = 0;
    loop {
        a.changed = false;
        a.round();
        rounds += 1;
        if !a.changed {
            break;
        }
        if rounds >= MAX_ROUNDS {
            // fall back to the trivially sound answer
            a.calls = program
                .predicates()
                .map(|(p, n)| (p.clone(), vec![vec![AbsVal::Any; n]]))
                .collect();
            break;
        }
    }
    a.calls
        .into_iter()
        .flat_map(|(p, list)| {
            list.into_iter().map(move |args| CallPattern { predicate: p.clone(), args })
        })
        .collect()
}
