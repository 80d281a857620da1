//! S-expression reader for `.lx` source text.

use num_bigint::BigInt;

use super::{ErrorCode, Loc, SyntaxError};

#[derive(Debug, Clone, PartialEq)]
pub enum SexpKind {
    Int(BigInt),
    Ident(String),
    Keyword(String),
    Str(String),
    List(Vec<Sexp>),
    Quote(Box<Sexp>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub loc: Loc,
}

impl Sexp {
    pub fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_keyword(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Keyword(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            _ => None,
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '\'' | ';' | '"')
}

/// Parses a token as an integer literal if it looks like one (`42`, `-7`, `+3`).
fn parse_int(tok: &str) -> Option<BigInt> {
    let digits = tok.strip_prefix(['-', '+']).unwrap_or(tok);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    tok.parse().ok()
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn loc(&self) -> Loc {
        Loc { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn at_eof(&mut self) -> bool {
        self.skip_trivia();
        self.chars.peek().is_none()
    }

    fn read(&mut self) -> Result<Sexp, SyntaxError> {
        self.skip_trivia();
        let loc = self.loc();
        let Some(&c) = self.chars.peek() else {
            return Err(SyntaxError::new(ErrorCode::UnexpectedToken, "unexpected end of input", loc));
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(SyntaxError::new(
                                ErrorCode::UnbalancedParens,
                                "missing `)` for list opened here",
                                loc,
                            ))
                        }
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
                Ok(Sexp { kind: SexpKind::List(items), loc })
            }
            ')' => Err(SyntaxError::new(ErrorCode::UnbalancedParens, "unexpected `)`", loc)),
            '\'' => {
                self.bump();
                let inner = self.read()?;
                Ok(Sexp { kind: SexpKind::Quote(Box::new(inner)), loc })
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => {
                            return Err(SyntaxError::new(
                                ErrorCode::UnexpectedToken,
                                "unterminated string literal",
                                loc,
                            ))
                        }
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some(e) => s.push(e),
                            None => {
                                return Err(SyntaxError::new(
                                    ErrorCode::UnexpectedToken,
                                    "unterminated string literal",
                                    loc,
                                ))
                            }
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                Ok(Sexp { kind: SexpKind::Str(s), loc })
            }
            _ => {
                let mut tok = String::new();
                while let Some(&ch) = self.chars.peek() {
                    if is_delimiter(ch) {
                        break;
                    }
                    tok.push(ch);
                    self.bump();
                }
                let kind = if let Some(n) = parse_int(&tok) {
                    SexpKind::Int(n)
                } else if let Some(kw) = tok.strip_prefix(':') {
                    if kw.is_empty() {
                        return Err(SyntaxError::new(ErrorCode::UnexpectedToken, "empty keyword `:`", loc));
                    }
                    SexpKind::Keyword(kw.to_string())
                } else {
                    SexpKind::Ident(tok)
                };
                Ok(Sexp { kind, loc })
            }
        }
    }
}

/// Reads exactly one expression; anything but trivia after it is an error.
pub fn read_one(text: &str) -> Result<Sexp, SyntaxError> {
    let mut r = Reader::new(text);
    let s = r.read()?;
    if !r.at_eof() {
        let loc = r.loc();
        let msg = if r.chars.peek() == Some(&')') {
            return Err(SyntaxError::new(ErrorCode::UnbalancedParens, "unexpected `)`", loc));
        } else {
            "trailing input after expression"
        };
        return Err(SyntaxError::new(ErrorCode::UnexpectedToken, msg, loc));
    }
    Ok(s)
}

pub fn read_all(text: &str) -> Result<Vec<Sexp>, SyntaxError> {
    let mut r = Reader::new(text);
    let mut out = Vec::new();
    while !r.at_eof() {
        out.push(r.read()?);
    }
    Ok(out)
}
