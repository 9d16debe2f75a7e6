use alloc::string::String;
use alloc::vec::Vec;

use crate::syntax::{Freeze, Origin, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Lambda,
    Num {
        value: f64,
        freeze: Freeze,
        range: Option<(f64, f64)>,
        /// Span of the digits, without annotations.
        digits: Span,
    },
    Str(String),
    Ident(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

fn is_delim(c: u8) -> bool {
    c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b'[' | b']' | b'|' | b';' | b'\'')
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    origin: Origin,
}

impl<'a> Lexer<'a> {
    fn span(&self, start: usize) -> Span {
        Span::new(self.origin, start, self.pos)
    }

    fn err(&self, start: usize, message: impl Into<String>) -> LexError {
        LexError {
            message: message.into(),
            span: Span::new(
                self.origin,
                start,
                self.pos.max(start + 1).min(self.bytes.len()),
            ),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b';' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn starts_number(&self) -> bool {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => true,
            Some(b'.') => self.peek_at(1).is_some_and(|c| c.is_ascii_digit()),
            Some(b'-') => match self.peek_at(1) {
                Some(c) if c.is_ascii_digit() => true,
                Some(b'.') => self.peek_at(2).is_some_and(|c| c.is_ascii_digit()),
                _ => false,
            },
            _ => false,
        }
    }

    /// Scans `-?digits(.digits)?(e[+-]?digits)?` and returns its value.
    fn raw_number(&mut self) -> Result<f64, LexError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        self.src[start..self.pos]
            .parse::<f64>()
            .map_err(|_| self.err(start, "malformed number"))
    }

    fn number(&mut self) -> Result<Token, LexError> {
        let start = self.pos;
        let value = self.raw_number()?;
        let digits = self.span(start);
        let freeze = match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Freeze::Frozen
            }
            Some(b'?') => {
                self.pos += 1;
                Freeze::Thawed
            }
            _ => Freeze::Plain,
        };
        let range = if self.peek() == Some(b'{') {
            let open = self.pos;
            self.pos += 1;
            if !self.starts_number() {
                return Err(self.err(open, "range bounds must be numeric literals"));
            }
            let lo = self.raw_number()?;
            if self.peek() != Some(b'-') {
                return Err(self.err(open, "expected '-' between range bounds"));
            }
            self.pos += 1;
            if !self.starts_number() {
                return Err(self.err(open, "range bounds must be numeric literals"));
            }
            let hi = self.raw_number()?;
            if self.peek() != Some(b'}') {
                return Err(self.err(open, "expected '}' closing range"));
            }
            self.pos += 1;
            if lo > hi {
                return Err(self.err(open, "range lower bound exceeds upper bound"));
            }
            Some((lo, hi))
        } else {
            None
        };
        if self.peek().is_some_and(|c| !is_delim(c)) {
            return Err(self.err(start, "unexpected character after number"));
        }
        Ok(Token {
            tok: Tok::Num {
                value,
                freeze,
                range,
                digits,
            },
            span: self.span(start),
        })
    }

    fn string(&mut self) -> Result<Token, LexError> {
        let start = self.pos;
        self.pos += 1;
        let body = self.pos;
        while let Some(c) = self.peek() {
            if c == b'\'' {
                let text = String::from(&self.src[body..self.pos]);
                self.pos += 1;
                return Ok(Token {
                    tok: Tok::Str(text),
                    span: self.span(start),
                });
            }
            self.pos += 1;
        }
        Err(self.err(start, "unterminated string"))
    }

    fn next(&mut self) -> Option<Result<Token, LexError>> {
        self.skip_trivia();
        let start = self.pos;
        let c = self.peek()?;
        let simple = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b'|' => Some(Tok::Bar),
            b'\\' => Some(Tok::Lambda),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Some(Ok(Token {
                tok,
                span: self.span(start),
            }));
        }
        if self.src[self.pos..].starts_with('λ') {
            self.pos += 'λ'.len_utf8();
            return Some(Ok(Token {
                tok: Tok::Lambda,
                span: self.span(start),
            }));
        }
        if c == b'\'' {
            return Some(self.string());
        }
        if self.starts_number() {
            return Some(self.number());
        }
        while self.peek().is_some_and(|c| !is_delim(c)) {
            self.pos += 1;
        }
        // A quote directly after an identifier is a prime, as in `x0'`.
        while self.peek() == Some(b'\'') && self.pos > start {
            self.pos += 1;
        }
        if self.pos == start {
            self.pos += 1;
            return Some(Err(self.err(start, "unexpected character")));
        }
        let text = &self.src[start..self.pos];
        if text.contains(['{', '}', '!', '?']) && !matches!(text, "!" | "?") {
            return Some(Err(self.err(start, "unexpected character in identifier")));
        }
        Some(Ok(Token {
            tok: Tok::Ident(String::from(text)),
            span: self.span(start),
        }))
    }
}

/// Splits `src` into tokens. Comments run from `;` to the end of the line.
pub fn tokenize(src: &str, origin: Origin) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        origin,
    };
    let mut out = Vec::new();
    while let Some(t) = lx.next() {
        out.push(t?);
    }
    Ok(out)
}

/// 1-based line and column of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let col_start = before
        .iter()
        .rposition(|&b| b == b'\n')
        .map_or(0, |p| p + 1);
    let col = src[col_start..offset].chars().count() + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, Origin::User)
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn annotated_number() {
        let t = toks("12!{3-30}");
        match &t[0] {
            Tok::Num {
                value,
                freeze,
                range,
                digits,
            } => {
                assert_eq!(*value, 12.0);
                assert_eq!(*freeze, Freeze::Frozen);
                assert_eq!(*range, Some((3.0, 30.0)));
                assert_eq!((digits.start, digits.end), (0, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minus_is_an_identifier_unless_followed_by_digit() {
        assert_eq!(
            toks("(- -3 x)"),
            alloc::vec![
                Tok::LParen,
                Tok::Ident("-".into()),
                Tok::Num {
                    value: -3.0,
                    freeze: Freeze::Plain,
                    range: None,
                    digits: Span::new(Origin::User, 3, 5)
                },
                Tok::Ident("x".into()),
                Tok::RParen
            ]
        );
    }

    #[test]
    fn primes_strings_and_comments() {
        assert_eq!(
            toks("x0' 'hi there' ; gone\n y"),
            alloc::vec![
                Tok::Ident("x0'".into()),
                Tok::Str("hi there".into()),
                Tok::Ident("y".into())
            ]
        );
    }

    #[test]
    fn negative_range_and_thaw() {
        match &toks("0?{-10-10.5}")[0] {
            Tok::Num { freeze, range, .. } => {
                assert_eq!(*freeze, Freeze::Thawed);
                assert_eq!(*range, Some((-10.0, 10.5)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_range_expressions_and_inverted_ranges() {
        assert!(tokenize("1{a-3}", Origin::User).is_err());
        assert!(tokenize("1{5-3}", Origin::User).is_err());
        assert!(tokenize("'open", Origin::User).is_err());
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
