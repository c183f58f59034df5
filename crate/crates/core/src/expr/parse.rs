//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := atom ("^" unary)?
//! atom    := number | ident | func "(" expr ")" | "(" expr ")"
//! func    := "exp" | "log" | "sin" | "cos" | "sinh" | "cosh"
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! reads as `-(x^2)`. Exponents must fold to a rational constant.

use std::collections::BTreeSet;

use super::{Expr, Func, Number};
use crate::error::ExprError;

/// Names an expression may refer to, split into chart coordinates and
/// free parameters.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    coordinates: BTreeSet<String>,
    parameters: BTreeSet<String>,
}

impl SymbolTable {
    pub fn new<S: AsRef<str>>(coordinates: &[S], parameters: &[S]) -> Self {
        SymbolTable {
            coordinates: coordinates.iter().map(|s| s.as_ref().to_string()).collect(),
            parameters: parameters.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn coordinates<S: AsRef<str>>(coordinates: &[S]) -> Self {
        Self::new(coordinates, &[])
    }

    pub fn with_parameter(mut self, name: &str) -> Self {
        self.parameters.insert(name.to_string());
        self
    }

    fn lookup(&self, name: &str) -> Option<Expr> {
        if self.coordinates.contains(name) {
            Some(Expr::coord(name))
        } else if self.parameters.contains(name) {
            Some(Expr::param(name))
        } else {
            None
        }
    }
}

/// Parses `text`, treating every allowed symbol as a chart coordinate.
pub fn parse_with(text: &str, allowed_symbols: &[&str]) -> Result<Expr, ExprError> {
    parse(text, &SymbolTable::coordinates(allowed_symbols))
}

pub fn parse(text: &str, symbols: &SymbolTable) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, symbols };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    symbols: &'a SymbolTable,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ExprError {
        ExprError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(-self.term()?);
            } else {
                return Ok(Expr::sum(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.eat(b'/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let exponent = self.unary()?;
        match exponent.as_const().and_then(Number::as_rational) {
            Some(r) => Ok(Expr::pow(base, r)),
            None => Err(ExprError::Syntax {
                offset: at,
                message: "exponent must be a rational constant".to_string(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match Number::parse_decimal(text) {
            Some(n) => Ok(Expr::constant(n)),
            None => Err(ExprError::Syntax { offset: start, message: format!("malformed number '{text}'") }),
        }
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        if let Some(f) = Func::from_name(name) {
            if self.eat(b'(') {
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')' after function argument"));
                }
                return Ok(Expr::func(f, arg));
            }
        }
        self.symbols
            .lookup(name)
            .ok_or_else(|| ExprError::UnknownSymbol { name: name.to_string(), offset: start })
    }
}
