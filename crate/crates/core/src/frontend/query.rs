//! Query patterns and regular type grammars from `%%` annotations.
//!
//! ```text
//! %% type DerTerm -> der(GTerm)
//! %% type GTerm -> u ; der(GTerm) ; GTerm + GTerm ; GTerm * GTerm
//! %% query: d(t=DerTerm, a)
//! ```
//!
//! Capitalised names inside a rule refer to other rules. `Any` and `Ground`
//! are predefined: any term, and any ground term over the program's
//! function symbols.

use std::collections::BTreeMap;
use std::fmt;

use super::ast::{Program, Symbol, Term};
use super::parser::parse_term_str;
use super::QueryError;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TypeExpr {
    Any,
    Ground,
    Ref(String),
    Fun(Symbol, Vec<TypeExpr>),
}

/// Named alternatives, each a [`TypeExpr`].
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TypeGrammar {
    pub rules: BTreeMap<String, Vec<TypeExpr>>,
}

impl TypeGrammar {
    pub fn alternatives(&self, name: &str) -> &[TypeExpr] {
        self.rules.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// True if every term described by `name` is ground.
    pub fn is_ground(&self, name: &str) -> bool {
        fn go<'a>(g: &'a TypeGrammar, e: &'a TypeExpr, seen: &mut Vec<&'a str>) -> bool {
            match e {
                TypeExpr::Any => false,
                TypeExpr::Ground => true,
                TypeExpr::Fun(_, args) => args.iter().all(|a| go(g, a, seen)),
                TypeExpr::Ref(r) => {
                    if seen.contains(&r.as_str()) {
                        return true;
                    }
                    seen.push(r);
                    g.alternatives(r).iter().all(|a| go(g, a, seen))
                }
            }
        }
        go(self, &TypeExpr::Ref(name.to_string()), &mut Vec::new())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ArgMode {
    Ground,
    Any,
    Typed(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QueryPattern {
    pub predicate: Symbol,
    pub modes: Vec<ArgMode>,
}

/// Validated query patterns together with the grammar they reference.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct QuerySpec {
    pub patterns: Vec<QueryPattern>,
    pub grammar: TypeGrammar,
}

impl fmt::Display for ArgMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgMode::Ground => write!(f, "g"),
            ArgMode::Any => write!(f, "a"),
            ArgMode::Typed(t) => write!(f, "t={t}"),
        }
    }
}

impl fmt::Display for QueryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.modes.is_empty() {
            write!(f, "(")?;
            for (i, m) in self.modes.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{m}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn strip_marker(line: &str) -> &str {
    line.trim().trim_start_matches('%').trim()
}

/// Parses `%% query:` and `%% type` annotation lines against `program`.
pub fn parse_query_spec<S: AsRef<str>>(
    annotations: &[S],
    program: &Program,
) -> Result<QuerySpec, QueryError> {
    let mut grammar = TypeGrammar::default();
    let mut raw_queries = Vec::new();
    for line in annotations {
        let body = strip_marker(line.as_ref());
        if let Some(q) = body.strip_prefix("query:") {
            raw_queries.push(q.trim().to_string());
        } else if let Some(rule) = body.strip_prefix("type") {
            let (name, rhs) = rule
                .split_once("->")
                .ok_or_else(|| QueryError::Malformed(format!("type rule without `->`: {body}")))?;
            let name = name.trim();
            if !name.starts_with(|c: char| c.is_ascii_uppercase()) {
                return Err(QueryError::Malformed(format!("type name `{name}` must be capitalised")));
            }
            let alts = grammar.rules.entry(name.to_string()).or_default();
            for alt in rhs.split(';') {
                let term = parse_term_str(alt.trim())
                    .map_err(|e| QueryError::Malformed(format!("in type {name}: {e}")))?;
                alts.push(type_expr(&term));
            }
        } else {
            return Err(QueryError::Malformed(format!("unknown annotation: {body}")));
        }
    }
    validate_grammar(&grammar, program)?;
    let patterns = raw_queries
        .iter()
        .map(|q| parse_pattern(q, program, &grammar))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuerySpec { patterns, grammar })
}

/// Parses a single pattern such as `div(g,g,a)` or `d(t=DerTerm,a)`.
pub fn parse_pattern(
    text: &str,
    program: &Program,
    grammar: &TypeGrammar,
) -> Result<QueryPattern, QueryError> {
    let text = text.trim();
    let (name, modes_text) = match text.find('(') {
        Some(open) => {
            let inner = text[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| QueryError::Malformed(format!("unbalanced pattern `{text}`")))?;
            (text[..open].trim(), Some(inner))
        }
        None => (text, None),
    };
    let predicate = Symbol::new(name.trim_matches('\''));
    let arity = program
        .signature
        .predicates
        .get(&predicate)
        .copied()
        .ok_or_else(|| QueryError::UnknownPredicate(name.to_string()))?;
    let mut modes = Vec::new();
    if let Some(inner) = modes_text {
        for m in inner.split(',') {
            let m = m.trim();
            let mode = match m {
                "g" => ArgMode::Ground,
                "a" => ArgMode::Any,
                _ => match m.strip_prefix("t=") {
                    Some(t) => {
                        let t = t.trim();
                        match t {
                            "Any" => ArgMode::Any,
                            "Ground" => ArgMode::Ground,
                            _ if grammar.rules.contains_key(t) => ArgMode::Typed(t.to_string()),
                            _ => return Err(QueryError::UnknownType(t.to_string())),
                        }
                    }
                    None => return Err(QueryError::Malformed(format!("unknown mode `{m}`"))),
                },
            };
            modes.push(mode);
        }
    }
    if modes.len() != arity {
        return Err(QueryError::Arity {
            predicate: name.to_string(),
            expected: arity,
            found: modes.len(),
        });
    }
    Ok(QueryPattern { predicate, modes })
}

fn type_expr(t: &Term) -> TypeExpr {
    match t {
        Term::Var(v) if v == "Any" => TypeExpr::Any,
        Term::Var(v) if v == "Ground" => TypeExpr::Ground,
        Term::Var(v) => TypeExpr::Ref(v.clone()),
        Term::Compound(s, args) => TypeExpr::Fun(s.clone(), args.iter().map(type_expr).collect()),
    }
}

fn validate_grammar(grammar: &TypeGrammar, program: &Program) -> Result<(), QueryError> {
    fn check(e: &TypeExpr, grammar: &TypeGrammar, program: &Program) -> Result<(), QueryError> {
        match e {
            TypeExpr::Any | TypeExpr::Ground => Ok(()),
            TypeExpr::Ref(r) if grammar.rules.contains_key(r) => Ok(()),
            TypeExpr::Ref(r) => Err(QueryError::UnknownType(r.clone())),
            TypeExpr::Fun(s, args) => {
                match program.signature.functions.get(s) {
                    Some(&a) if a == args.len() => {}
                    Some(&a) => {
                        return Err(QueryError::Malformed(format!(
                            "type uses {s}/{} but the program has {s}/{a}",
                            args.len()
                        )))
                    }
                    None => {
                        return Err(QueryError::Malformed(format!(
                            "type uses function symbol {s}/{} absent from the program",
                            args.len()
                        )))
                    }
                }
                args.iter().try_for_each(|a| check(a, grammar, program))
            }
        }
    }
    for alts in grammar.rules.values() {
        for a in alts {
            check(a, grammar, program)?;
        }
    }
    Ok(())
}
