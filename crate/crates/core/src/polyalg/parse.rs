//! Reader for the printed form of polynomials with integer coefficients.

use num_bigint::BigInt;
use num_traits::One;

use super::poly::{Monomial, Poly, UPoly, Unknown, VPoly, Var};
use super::PolyError;

type RawTerm = (BigInt, Vec<(String, u32)>);

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

struct Reader<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s.get(self.pos).map(|&b| b as char)
    }

    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn int(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        text.parse().map_err(|_| self.err("expected integer"))
    }

    fn factor(&mut self, term: &mut RawTerm) -> Result<(), PolyError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                term.0 *= self.int()?;
                Ok(())
            }
            Some(c) if is_ident_start(c) => {
                let start = self.pos;
                while self.pos < self.s.len() && is_ident_char(self.s[self.pos] as char) {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii").to_string();
                let mut exp = 1u32;
                if self.peek() == Some('^') {
                    self.pos += 1;
                    exp = self.int()?.try_into().map_err(|_| self.err("exponent too large"))?;
                }
                term.1.push((name, exp));
                Ok(())
            }
            _ => Err(self.err("expected integer or identifier")),
        }
    }

    fn sum(&mut self) -> Result<Vec<RawTerm>, PolyError> {
        let mut out = Vec::new();
        let mut sign = BigInt::one();
        if self.peek() == Some('-') {
            self.pos += 1;
            sign = -sign;
        }
        loop {
            let mut term = (sign.clone(), Vec::new());
            self.factor(&mut term)?;
            while self.peek() == Some('*') {
                self.pos += 1;
                self.factor(&mut term)?;
            }
            out.push(term);
            match self.peek() {
                Some('+') => sign = BigInt::one(),
                Some('-') => sign = -BigInt::one(),
                None => return Ok(out),
                Some(_) => return Err(self.err("unexpected character")),
            }
            self.pos += 1;
        }
    }
}

fn read(text: &str) -> Result<Vec<RawTerm>, PolyError> {
    Reader { s: text.as_bytes(), pos: 0 }.sum()
}

impl UPoly {
    /// Parses text such as `2*a*b^2 - c + 1`.
    pub fn parse(text: &str) -> Result<UPoly, PolyError> {
        Ok(Poly::from_terms(read(text)?.into_iter().map(|(c, m)| {
            (Monomial::from_powers(m.into_iter().map(|(v, e)| (Unknown::new(&v), e))), c)
        })))
    }
}

impl VPoly {
    /// Parses a polynomial with integer coefficients such as `X1^2 + 2*X1 + 2`.
    pub fn parse_concrete(text: &str) -> Result<VPoly, PolyError> {
        Ok(Poly::from_terms(read(text)?.into_iter().map(|(c, m)| {
            (
                Monomial::from_powers(m.into_iter().map(|(v, e)| (Var::new(&v), e))),
                UPoly::constant(c),
            )
        })))
    }
}
