//! Abstract syntax of definite logic programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// Name of a function or predicate symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `'.'/2`, the list constructor produced by `[H|T]`.
    pub fn cons() -> Self {
        Symbol::new(".")
    }

    /// `[]/0`, the empty list.
    pub fn nil() -> Self {
        Symbol::new("[]")
    }

    /// True if the name can be written without quotes.
    pub fn is_plain(&self) -> bool {
        let s = self.as_str();
        let mut chars = s.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {
                chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
            }
            Some(c) if c.is_ascii_digit() => s.chars().all(|c| c.is_ascii_digit()),
            _ => s == "[]",
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_plain() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "'")?;
            for c in self.0.chars() {
                match c {
                    '\'' => write!(f, "\\'")?,
                    '\\' => write!(f, "\\\\")?,
                    c => write!(f, "{c}")?,
                }
            }
            write!(f, "'")
        }
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(String),
    /// Constants are compounds with no arguments.
    Compound(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Self {
        Term::Compound(Symbol::new(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Self {
        Term::Compound(Symbol::new(name), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Applies `f` to every variable, rebuilding the term.
    pub fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(s, args) => {
                Term::Compound(s.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom { predicate: Symbol::new(predicate), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for a in &self.args {
            a.collect_vars(&mut out);
        }
        out
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    pub head: Atom,
    /// Left-to-right order is significant.
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for t in self.head.args.iter().chain(self.body.iter().flat_map(|b| b.args.iter())) {
            t.collect_vars(&mut out);
        }
        out
    }
}

/// Arities of the function and predicate symbols of a program.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Signature {
    pub functions: BTreeMap<Symbol, usize>,
    pub predicates: BTreeMap<Symbol, usize>,
}

impl Signature {
    pub fn arity(&self, sym: &Symbol) -> Option<usize> {
        self.functions.get(sym).or_else(|| self.predicates.get(sym)).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty() && self.predicates.is_empty()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub signature: Signature,
}

impl Program {
    pub fn predicates(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.signature.predicates.iter().map(|(s, a)| (s, *a))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.signature.functions.iter().map(|(s, a)| (s, *a))
    }

    /// Indices of the clauses defining `pred`.
    pub fn clauses_of<'a>(&'a self, pred: &'a Symbol) -> impl Iterator<Item = (usize, &'a Clause)> {
        self.clauses.iter().enumerate().filter(move |(_, c)| &c.head.predicate == pred)
    }

    pub fn function_symbols_used(&self) -> BTreeSet<&Symbol> {
        self.signature.functions.keys().collect()
    }
}

fn needs_parens_left(t: &Term, op: &str) -> bool {
    // `+` and `*` are left associative; `*` binds tighter.
    match t {
        Term::Compound(s, args) if args.len() == 2 => match (s.as_str(), op) {
            ("+", "*") => true,
            _ => false,
        },
        _ => false,
    }
}

fn needs_parens_right(t: &Term, op: &str) -> bool {
    match t {
        Term::Compound(s, args) if args.len() == 2 => match (s.as_str(), op) {
            ("+", _) => true,
            ("*", "*") => true,
            _ => false,
        },
        _ => false,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Compound(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::Compound(s, args)
                if args.len() == 2 && (s.as_str() == "+" || s.as_str() == "*") =>
            {
                let op = s.as_str();
                if needs_parens_left(&args[0], op) {
                    write!(f, "({})", args[0])?;
                } else {
                    write!(f, "{}", args[0])?;
                }
                write!(f, " {op} ")?;
                if needs_parens_right(&args[1], op) {
                    write!(f, "({})", args[1])
                } else {
                    write!(f, "{}", args[1])
                }
            }
            Term::Compound(s, args) if args.len() == 2 && s.as_str() == "." => {
                write!(f, "[{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::Compound(s, a) if a.len() == 2 && s.as_str() == "." => {
                            write!(f, ", {}", a[0])?;
                            tail = &a[1];
                        }
                        Term::Compound(s, a) if a.is_empty() && s.as_str() == "[]" => break,
                        other => {
                            write!(f, " | {other}")?;
                            break;
                        }
                    }
                }
                write!(f, "]")
            }
            Term::Compound(s, args) => {
                if s.as_str() == "[]" {
                    write!(f, "'[]'(")?;
                } else {
                    write!(f, "{s}(")?;
                }
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Term::Compound(self.predicate.clone(), self.args.clone()).fmt(f)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        write!(f, ".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
