use std::collections::BTreeMap;

use super::ast::{Atom, Clause, Program, Signature, Symbol, Term};
use super::lexer::{lex, Spanned, Tok};
use super::ParseError;

/// Predicates with built-in semantics; programs using them are outside the
/// supported fragment.
const BUILTINS: &[&str] = &[
    "is", "true", "fail", "false", "call", "not", "var", "nonvar", "atom", "atomic", "number",
    "integer", "functor", "arg", "copy_term", "assert", "asserta", "assertz", "retract",
    "write", "writeln", "print", "nl", "read", "halt", "findall", "bagof", "setof",
];

/// A parsed source file: the program and its `%%` annotation lines.
#[derive(Clone, Debug)]
pub struct Source {
    pub program: Program,
    pub annotations: Vec<String>,
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_source(text).map(|s| s.program)
}

pub fn parse_source(text: &str) -> Result<Source, ParseError> {
    let lexed = lex(text)?;
    let mut p = Parser { toks: lexed.tokens, pos: 0, anon: 0 };
    let mut clauses = Vec::new();
    let mut lines = Vec::new();
    while p.peek() != &Tok::Eof {
        lines.push(p.cur().line);
        clauses.push(p.clause()?);
    }
    let signature = build_signature(&clauses, &lines)?;
    Ok(Source {
        program: Program { clauses, signature },
        annotations: lexed.annotations.into_iter().map(|(_, s)| s).collect(),
    })
}

/// Parses a single term (used for type grammar rules and query overrides).
pub(crate) fn parse_term_str(text: &str) -> Result<Term, ParseError> {
    let lexed = lex(text)?;
    let mut p = Parser { toks: lexed.tokens, pos: 0, anon: 0 };
    let t = p.term()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected());
    }
    Ok(t)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn cur(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.cur().tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.cur().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self) -> ParseError {
        let t = self.cur();
        match &t.tok {
            Tok::Op(s) if s != "+" && s != "*" && s != ":-" => ParseError::Unsupported {
                line: t.line,
                col: t.col,
                token: s.clone(),
            },
            Tok::Name(s) if matches!(s.as_str(), "is" | "mod" | "rem" | "xor") => {
                ParseError::Unsupported { line: t.line, col: t.col, token: s.clone() }
            }
            other => ParseError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("unexpected {}", other.text()),
            },
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.next();
            Ok(())
        } else {
            let t = self.cur();
            match &t.tok {
                Tok::Op(_) | Tok::Name(_) => Err(self.unexpected()),
                other => Err(ParseError::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: format!("expected `{}`, found {}", tok.text(), other.text()),
                }),
            }
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        self.anon = 0;
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.peek() == &Tok::Op(":-".into()) {
            self.next();
            body.push(self.atom()?);
            while self.peek() == &Tok::Comma {
                self.next();
                body.push(self.atom()?);
            }
        }
        self.expect(Tok::End)?;
        Ok(Clause { head, body })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let start = self.cur().clone();
        let t = self.term()?;
        match t {
            Term::Compound(sym, args) => {
                if BUILTINS.contains(&sym.as_str()) {
                    return Err(ParseError::Unsupported {
                        line: start.line,
                        col: start.col,
                        token: sym.as_str().to_string(),
                    });
                }
                if sym.as_str().chars().all(|c| c.is_ascii_digit()) {
                    return Err(ParseError::Syntax {
                        line: start.line,
                        col: start.col,
                        msg: format!("integer `{sym}` is not an atom"),
                    });
                }
                Ok(Atom { predicate: sym, args })
            }
            Term::Var(_) if !matches!(self.peek(), Tok::Comma | Tok::End) => Err(self.unexpected()),
            Term::Var(v) => Err(ParseError::Unsupported {
                line: start.line,
                col: start.col,
                token: v,
            }),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.product()?;
        while self.peek() == &Tok::Op("+".into()) {
            self.next();
            let rhs = self.product()?;
            lhs = Term::Compound(Symbol::new("+"), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.primary()?;
        while self.peek() == &Tok::Op("*".into()) {
            self.next();
            let rhs = self.primary()?;
            lhs = Term::Compound(Symbol::new("*"), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let t = self.cur().clone();
        match t.tok {
            Tok::Var(v) => {
                self.next();
                if v == "_" {
                    self.anon += 1;
                    Ok(Term::Var(format!("_G{}", self.anon)))
                } else {
                    Ok(Term::Var(v))
                }
            }
            Tok::Int(n) => {
                self.next();
                Ok(Term::Compound(Symbol::new(&n), Vec::new()))
            }
            Tok::Name(name) => {
                self.next();
                self.compound_args(Symbol::new(&name))
            }
            Tok::Quoted(name) => {
                self.next();
                self.compound_args(Symbol::new(&name))
            }
            Tok::LParen => {
                self.next();
                let inner = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::LBracket => {
                self.next();
                self.list()
            }
            _ => Err(self.unexpected()),
        }
    }

    fn compound_args(&mut self, sym: Symbol) -> Result<Term, ParseError> {
        if self.peek() != &Tok::LParen {
            return Ok(Term::Compound(sym, Vec::new()));
        }
        self.next();
        let mut args = vec![self.term()?];
        while self.peek() == &Tok::Comma {
            self.next();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(Term::Compound(sym, args))
    }

    fn list(&mut self) -> Result<Term, ParseError> {
        if self.peek() == &Tok::RBracket {
            self.next();
            return Ok(Term::Compound(Symbol::nil(), Vec::new()));
        }
        let mut items = vec![self.term()?];
        while self.peek() == &Tok::Comma {
            self.next();
            items.push(self.term()?);
        }
        let tail = if self.peek() == &Tok::Bar {
            self.next();
            self.term()?
        } else {
            Term::Compound(Symbol::nil(), Vec::new())
        };
        self.expect(Tok::RBracket)?;
        Ok(items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::Compound(Symbol::cons(), vec![item, acc])))
    }
}

fn build_signature(clauses: &[Clause], lines: &[usize]) -> Result<Signature, ParseError> {
    let mut functions: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut predicates: BTreeMap<Symbol, usize> = BTreeMap::new();

    fn note(
        map: &mut BTreeMap<Symbol, usize>,
        sym: &Symbol,
        arity: usize,
        line: usize,
    ) -> Result<(), ParseError> {
        match map.get(sym) {
            Some(&a) if a != arity => Err(ParseError::Arity {
                symbol: sym.as_str().to_string(),
                expected: a,
                found: arity,
                line,
            }),
            Some(_) => Ok(()),
            None => {
                map.insert(sym.clone(), arity);
                Ok(())
            }
        }
    }

    fn walk(
        t: &Term,
        functions: &mut BTreeMap<Symbol, usize>,
        line: usize,
    ) -> Result<(), ParseError> {
        if let Term::Compound(s, args) = t {
            note(functions, s, args.len(), line)?;
            for a in args {
                walk(a, functions, line)?;
            }
        }
        Ok(())
    }

    for (clause, &line) in clauses.iter().zip(lines) {
        for atom in std::iter::once(&clause.head).chain(&clause.body) {
            note(&mut predicates, &atom.predicate, atom.args.len(), line)?;
            for t in &atom.args {
                walk(t, &mut functions, line)?;
            }
        }
    }
    if let Some(s) = functions.keys().find(|s| predicates.contains_key(*s)) {
        return Err(ParseError::SymbolClash(s.as_str().to_string()));
    }
    Ok(Signature { functions, predicates })
}
