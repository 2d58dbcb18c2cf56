use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Lowercase identifier.
    Name(String),
    Quoted(String),
    Var(String),
    Int(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Comma,
    End,
    /// A run of symbol characters (`:-`, `+`, `\+`, `=..`, ...) or a solo char like `!` or `;`.
    Op(String),
    Eof,
}

impl Tok {
    pub(crate) fn text(&self) -> String {
        match self {
            Tok::Name(s) | Tok::Var(s) | Tok::Int(s) | Tok::Op(s) => s.clone(),
            Tok::Quoted(s) => format!("'{s}'"),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::Bar => "|".into(),
            Tok::Comma => ",".into(),
            Tok::End => ".".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

/// Output of lexing: tokens plus `%%` annotation lines.
pub(crate) struct Lexed {
    pub tokens: Vec<Spanned>,
    pub annotations: Vec<(usize, String)>,
}

pub(crate) fn lex(text: &str) -> Result<Lexed, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut annotations = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            let start = i;
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            let comment: String = chars[start..i].iter().collect();
            if let Some(rest) = comment.strip_prefix("%%") {
                let rest = rest.trim();
                if rest.starts_with("query:") || rest.starts_with("type ") {
                    annotations.push((tl, comment.trim().to_string()));
                }
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::Syntax {
                        line: tl,
                        col: tc,
                        msg: "unterminated block comment".into(),
                    });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let tok = if c.is_ascii_lowercase() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            Tok::Name(chars[start..i].iter().collect())
        } else if c.is_ascii_uppercase() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            Tok::Var(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            Tok::Int(chars[start..i].iter().collect())
        } else if c == '\'' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::Syntax {
                        line: tl,
                        col: tc,
                        msg: "unterminated quoted atom".into(),
                    });
                }
                match chars[i] {
                    '\'' if chars.get(i + 1) == Some(&'\'') => {
                        s.push('\'');
                        bump!();
                        bump!();
                    }
                    '\'' => {
                        bump!();
                        break;
                    }
                    '\\' if i + 1 < chars.len() => {
                        bump!();
                        s.push(chars[i]);
                        bump!();
                    }
                    ch => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            Tok::Quoted(s)
        } else if c == '.'
            && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%')
        {
            bump!();
            Tok::End
        } else if SYMBOL_CHARS.contains(c) {
            let start = i;
            while i < chars.len() && SYMBOL_CHARS.contains(chars[i]) {
                // a trailing `.` followed by layout terminates the clause
                if chars[i] == '.'
                    && i > start
                    && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%')
                {
                    break;
                }
                bump!();
            }
            Tok::Op(chars[start..i].iter().collect())
        } else {
            bump!();
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '|' => Tok::Bar,
                ',' => Tok::Comma,
                '!' | ';' | '{' | '}' | '"' | '`' => Tok::Op(c.to_string()),
                other => {
                    return Err(ParseError::Syntax {
                        line: tl,
                        col: tc,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            }
        };
        tokens.push(Spanned { tok, line: tl, col: tc });
    }
    tokens.push(Spanned { tok: Tok::Eof, line, col });
    Ok(Lexed { tokens, annotations })
}
