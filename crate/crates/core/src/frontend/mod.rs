//! Parsing of definite logic programs and their query annotations.

mod ast;
mod lexer;
mod parser;
mod query;

pub use ast::{Atom, Clause, Program, Signature, Symbol, Term};
pub use parser::{parse_program, parse_source, Source};
pub use query::{
    parse_pattern, parse_query_spec, ArgMode, QueryPattern, QuerySpec, TypeExpr, TypeGrammar,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported construct `{token}` at {line}:{col}")]
    Unsupported { line: usize, col: usize, token: String },
    #[error("symbol `{symbol}` used with arity {found} at line {line}, but earlier with arity {expected}")]
    Arity { symbol: String, expected: usize, found: usize, line: usize },
    #[error("symbol `{0}` is used both as a function and as a predicate")]
    SymbolClash(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("query names unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("query for `{predicate}` has {found} modes, predicate has arity {expected}")]
    Arity { predicate: String, expected: usize, found: usize },
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("malformed annotation: {0}")]
    Malformed(String),
}
