//! Recursive-descent parser for the infix expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' int)?
//! int    := ('-' | '+')? digits | '(' ('-' | '+')? digits ')'
//! atom   := number | 'x0' | 'x1' | 'x2' | 'x3' | 'i' | 'pi'
//!         | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'log' | 'conj'
//! ```

use thiserror::Error;

use super::{Func, ScalarExpr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    UnknownIdentifier(String),
    BadNumber(String),
    BadExponent,
    TrailingInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at position {position}", describe(.kind))]
pub struct ParseError {
    /// Byte offset into the source text.
    pub position: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedEnd => "unexpected end of expression".into(),
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character `{c}`"),
        ParseErrorKind::UnknownIdentifier(id) => format!("unknown identifier `{id}`"),
        ParseErrorKind::BadNumber(n) => format!("malformed number `{n}`"),
        ParseErrorKind::BadExponent => "exponent must be an integer literal".into(),
        ParseErrorKind::TrailingInput => "unexpected trailing input".into(),
    }
}

pub fn parse_expr(text: &str) -> Result<ScalarExpr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error(ParseErrorKind::TrailingInput));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(found) if found == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(found) => Err(self.error(ParseErrorKind::UnexpectedChar(found))),
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr, ParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let n = self.exponent()?;
            return Ok(base.powi(n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parens = self.eat('(');
        let negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        let digits = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .count();
        if digits == 0 {
            return Err(self.error(ParseErrorKind::BadExponent));
        }
        self.pos += digits;
        if self.rest().starts_with(['.', 'e', 'E']) {
            return Err(self.error(ParseErrorKind::BadExponent));
        }
        let magnitude: i32 = self.src[start..self.pos].parse().map_err(|_| ParseError {
            position: start,
            kind: ParseErrorKind::BadExponent,
        })?;
        if parens {
            self.expect(')')?;
        }
        Ok(if negative { -magnitude } else { magnitude })
    }

    fn atom(&mut self) -> Result<ScalarExpr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error(ParseErrorKind::UnexpectedEnd));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.identifier();
        }
        Err(self.error(ParseErrorKind::UnexpectedChar(c)))
    }

    fn number(&mut self) -> Result<ScalarExpr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp_end = end + 1;
            if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
                exp_end += 1;
            }
            let digits_start = exp_end;
            while exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                exp_end += 1;
            }
            // `2exp(x0)` is not an exponent; only consume `e` followed by digits.
            if exp_end > digits_start {
                end = exp_end;
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text.parse().map_err(|_| ParseError {
            position: start,
            kind: ParseErrorKind::BadNumber(text.to_string()),
        })?;
        self.pos = end;
        Ok(ScalarExpr::real(value))
    }

    fn identifier(&mut self) -> Result<ScalarExpr, ParseError> {
        let start = self.pos;
        let len = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .count();
        let ident = &self.src[start..start + len];
        let unknown = || ParseError {
            position: start,
            kind: ParseErrorKind::UnknownIdentifier(ident.to_string()),
        };
        let func = match ident {
            "x0" | "x1" | "x2" | "x3" => {
                self.pos += len;
                let axis = (ident.as_bytes()[1] - b'0') as usize;
                return Ok(ScalarExpr::var(axis));
            }
            "i" => {
                self.pos += len;
                return Ok(ScalarExpr::i());
            }
            "pi" => {
                self.pos += len;
                return Ok(ScalarExpr::pi());
            }
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "conj" => None,
            _ => return Err(unknown()),
        };
        self.pos += len;
        self.expect('(')?;
        let arg = self.expr()?;
        self.expect(')')?;
        Ok(match func {
            Some(f) => arg.apply(f),
            None => arg.conj(),
        })
    }
}
