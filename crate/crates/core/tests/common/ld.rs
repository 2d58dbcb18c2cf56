//! A depth-bounded interpreter for definite programs with leftmost selection
//! and full backtracking. It explores the whole LD-tree of a query and
//! records every selected atom, every answer and every parent/child call.

use std::collections::HashMap;

use polyterm::frontend::{Atom, Program, Term};

#[derive(Debug, PartialEq, Eq)]
pub enum Stop {
    /// Some branch went deeper than the bound.
    Depth,
    /// More resolution steps than the budget.
    Budget,
}

#[derive(Default)]
struct Subst(HashMap<String, Term>);

impl Subst {
    fn walk(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.0.get(v) {
                Some(b) => self.walk(b),
                None => t.clone(),
            },
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.walk(a)).collect())
            }
        }
    }

    fn occurs(&self, v: &str, t: &Term) -> bool {
        match t {
            Term::Var(w) => match self.0.get(w) {
                Some(b) => self.occurs(v, b),
                None => v == w,
            },
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.shallow(a);
        let b = self.shallow(b);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if self.occurs(x, t) {
                    return false;
                }
                self.0.insert(x.clone(), t.clone());
                true
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
        }
    }

    fn shallow(&self, t: &Term) -> Term {
        let mut t = t.clone();
        while let Term::Var(v) = &t {
            match self.0.get(v) {
                Some(b) => t = b.clone(),
                None => break,
            }
        }
        t
    }

    fn atom(&self, a: &Atom) -> Atom {
        Atom { predicate: a.predicate.clone(), args: a.args.iter().map(|t| self.walk(t)).collect() }
    }
}

pub struct Interpreter<'a> {
    program: &'a Program,
    pub max_depth: usize,
    pub budget: usize,
    steps: usize,
    renames: usize,
    /// Every selected atom, instantiated at the moment of selection.
    pub calls: Vec<Atom>,
    /// Every computed answer of every selected atom.
    pub answers: Vec<Atom>,
    /// `(selected atom, body atom selected while resolving it)`.
    pub edges: Vec<(Atom, Atom)>,
}

impl<'a> Interpreter<'a> {
    pub fn new(program: &'a Program, max_depth: usize, budget: usize) -> Self {
        Interpreter {
            program,
            max_depth,
            budget,
            steps: 0,
            renames: 0,
            calls: Vec::new(),
            answers: Vec::new(),
            edges: Vec::new(),
        }
    }

    /// All answers of `goal`, or why the tree could not be explored.
    pub fn run(&mut self, goal: &Atom) -> Result<Vec<Atom>, Stop> {
        self.solve(goal, 0)
    }

    fn solve(&mut self, goal: &Atom, depth: usize) -> Result<Vec<Atom>, Stop> {
        if depth > self.max_depth {
            return Err(Stop::Depth);
        }
        self.calls.push(goal.clone());
        let mut out = Vec::new();
        for (_, clause) in self.program.clauses_of(&goal.predicate) {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Stop::Budget);
            }
            self.renames += 1;
            let tag = self.renames;
            let rename = |t: &Term| t.map_vars(&mut |v| Term::var(&format!("{v}#{tag}")));
            let head = Atom {
                predicate: clause.head.predicate.clone(),
                args: clause.head.args.iter().map(rename).collect(),
            };
            let body: Vec<Atom> = clause
                .body
                .iter()
                .map(|b| Atom { predicate: b.predicate.clone(), args: b.args.iter().map(rename).collect() })
                .collect();
            let mut s = Subst::default();
            if !head.args.iter().zip(&goal.args).all(|(h, g)| s.unify(h, g)) {
                continue;
            }
            for s in self.solve_body(goal, &body, s, depth)? {
                let answer = s.atom(goal);
                self.answers.push(answer.clone());
                out.push(answer);
            }
        }
        Ok(out)
    }

    fn solve_body(
        &mut self,
        parent: &Atom,
        body: &[Atom],
        s: Subst,
        depth: usize,
    ) -> Result<Vec<Subst>, Stop> {
        let Some((first, rest)) = body.split_first() else { return Ok(vec![s]) };
        let selected = s.atom(first);
        self.edges.push((parent.clone(), selected.clone()));
        let mut out = Vec::new();
        for answer in self.solve(&selected, depth + 1)? {
            let mut s2 = Subst(s.0.clone());
            let ok = selected.args.iter().zip(&answer.args).all(|(a, b)| s2.unify(a, b));
            assert!(ok, "an answer is an instance of its goal");
            out.extend(self.solve_body(parent, rest, s2, depth)?);
        }
        Ok(out)
    }
}
