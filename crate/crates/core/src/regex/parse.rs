//! Recursive-descent parser for label regular expressions.
//!
//! Precedence, loosest first: alternation `|`, concatenation (whitespace,
//! `.` or `·`), postfix `*` `+` `?`, atoms. Atoms are label identifiers
//! `[A-Za-z_][A-Za-z0-9_]*`, parenthesized groups, `()` for the empty word
//! and `!` for the empty language.

use std::fmt;

use crate::error::RegexError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegexAst {
    Label(String),
    Concat(Box<RegexAst>, Box<RegexAst>),
    Alt(Box<RegexAst>, Box<RegexAst>),
    Star(Box<RegexAst>),
    Plus(Box<RegexAst>),
    Opt(Box<RegexAst>),
    /// Matches only the empty word.
    Empty,
    /// Matches nothing.
    Never,
}

impl RegexAst {
    pub fn label(l: &str) -> Self {
        RegexAst::Label(l.to_string())
    }

    pub fn concat(a: RegexAst, b: RegexAst) -> Self {
        RegexAst::Concat(Box::new(a), Box::new(b))
    }

    pub fn alt(a: RegexAst, b: RegexAst) -> Self {
        RegexAst::Alt(Box::new(a), Box::new(b))
    }

    pub fn star(a: RegexAst) -> Self {
        RegexAst::Star(Box::new(a))
    }

    pub fn plus(a: RegexAst) -> Self {
        RegexAst::Plus(Box::new(a))
    }

    pub fn opt(a: RegexAst) -> Self {
        RegexAst::Opt(Box::new(a))
    }

    pub fn node_count(&self) -> usize {
        match self {
            RegexAst::Label(_) | RegexAst::Empty | RegexAst::Never => 1,
            RegexAst::Concat(a, b) | RegexAst::Alt(a, b) => 1 + a.node_count() + b.node_count(),
            RegexAst::Star(a) | RegexAst::Plus(a) | RegexAst::Opt(a) => 1 + a.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RegexAst::Label(_) | RegexAst::Empty | RegexAst::Never => 1,
            RegexAst::Concat(a, b) | RegexAst::Alt(a, b) => 1 + a.depth().max(b.depth()),
            RegexAst::Star(a) | RegexAst::Plus(a) | RegexAst::Opt(a) => 1 + a.depth(),
        }
    }
}

impl fmt::Display for RegexAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegexAst::Label(l) => f.write_str(l),
            RegexAst::Concat(a, b) => write!(f, "({a} {b})"),
            RegexAst::Alt(a, b) => write!(f, "({a}|{b})"),
            RegexAst::Star(a) => write!(f, "({a})*"),
            RegexAst::Plus(a) => write!(f, "({a})+"),
            RegexAst::Opt(a) => write!(f, "({a})?"),
            RegexAst::Empty => f.write_str("()"),
            RegexAst::Never => f.write_str("!"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Bar,
    Dot,
    Star,
    Plus,
    Question,
    LParen,
    RParen,
    Bang,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, RegexError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '|' => Tok::Bar,
            '.' | '·' => Tok::Dot,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '?' => Tok::Question,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '!' => Tok::Bang,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((at, Tok::Ident(ident)));
                continue;
            }
            other => {
                return Err(RegexError::Syntax {
                    offset: at,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        chars.next();
        out.push((at, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, RegexError> {
        Err(RegexError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn alternation(&mut self) -> Result<RegexAst, RegexError> {
        let mut left = self.concatenation()?;
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            let right = self.concatenation()?;
            left = RegexAst::alt(left, right);
        }
        Ok(left)
    }

    fn starts_atom(tok: Option<&Tok>) -> bool {
        matches!(tok, Some(Tok::Ident(_) | Tok::LParen | Tok::Bang))
    }

    fn concatenation(&mut self) -> Result<RegexAst, RegexError> {
        let mut left = self.postfix()?;
        loop {
            if self.peek() == Some(&Tok::Dot) {
                self.pos += 1;
                let right = self.postfix()?;
                left = RegexAst::concat(left, right);
            } else if Self::starts_atom(self.peek()) {
                let right = self.postfix()?;
                left = RegexAst::concat(left, right);
            } else {
                return Ok(left);
            }
        }
    }

    fn postfix(&mut self) -> Result<RegexAst, RegexError> {
        let mut node = self.atom()?;
        loop {
            node = match self.peek() {
                Some(Tok::Star) => RegexAst::star(node),
                Some(Tok::Plus) => RegexAst::plus(node),
                Some(Tok::Question) => RegexAst::opt(node),
                _ => return Ok(node),
            };
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> Result<RegexAst, RegexError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(RegexAst::Label(name))
            }
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(RegexAst::Never)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::RParen) {
                    self.pos += 1;
                    return Ok(RegexAst::Empty);
                }
                let inner = self.alternation()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(tok) => self.error(format!("unexpected {tok:?}")),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses a label regex. Empty or all-whitespace input is an error.
pub fn parse_regex(src: &str) -> Result<RegexAst, RegexError> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(RegexError::Empty);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let ast = p.alternation()?;
    if p.pos != p.toks.len() {
        return p.error("trailing input");
    }
    Ok(ast)
}
