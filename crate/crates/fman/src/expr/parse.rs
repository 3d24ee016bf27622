//! Recursive-descent parser for the expression DSL.
//!
//! Grammar:
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := base ('^' exponent)?
//! base     := number | symbol | func '(' expr ')' | '(' expr ')' | '-' base
//! exponent := '-'? number
//! ```
//! Whitespace is insignificant. Symbols must be coordinates of the chart.

use super::{Func, Node, ScalarExpr};
use crate::chart::Chart;
use crate::error::{FmanError, Result};

pub fn parse_expr(text: &str, chart: &Chart) -> Result<ScalarExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        chart,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    chart: &'a Chart,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> FmanError {
        FmanError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                acc = ScalarExpr::new(Node::Add(acc, rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                acc = ScalarExpr::new(Node::Sub(acc, rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = ScalarExpr::new(Node::Mul(acc, rhs));
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                acc = ScalarExpr::new(Node::Div(acc, rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<ScalarExpr> {
        let base = self.base()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let start = self.pos;
            let (value, is_int) = self.number()?;
            let value = if neg { -value } else { value };
            if is_int {
                if value.abs() > f64::from(i32::MAX) {
                    self.pos = start;
                    return Err(self.err("integer exponent out of range"));
                }
                Ok(ScalarExpr::new(Node::PowI(base, value as i32)))
            } else {
                Ok(ScalarExpr::new(Node::PowF(base, value)))
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<ScalarExpr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'-') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.base()?;
                // Fold a literal so that negative constants print/reparse
                // to the same tree.
                if let Node::Num(c) = &*inner.0 {
                    return Ok(ScalarExpr::constant(-c));
                }
                Ok(ScalarExpr::new(Node::Neg(inner)))
            }
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let (value, _) = self.number()?;
                Ok(ScalarExpr::constant(value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.symbol_or_call(),
            Some(c) => Err(self.err(format!("unexpected character `{}`", c as char))),
        }
    }

    fn symbol_or_call(&mut self) -> Result<ScalarExpr> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("identifier bytes are ascii")
            .to_string();
        self.skip_ws();
        if let Some(func) = Func::from_name(&name) {
            if !self.eat(b'(') {
                return Err(self.err(format!("expected `(` after function `{name}`")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(ScalarExpr::new(Node::Apply(func, arg)));
        }
        match self.chart.coord_index(&name) {
            Some(index) => Ok(ScalarExpr::coord(name, index)),
            None => Err(FmanError::UnknownSymbol { name, pos: start }),
        }
    }

    /// Parses a number literal; returns (value, had-no-fraction-or-exponent).
    fn number(&mut self) -> Result<(f64, bool)> {
        let start = self.pos;
        let mut is_int = true;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            is_int = false;
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                is_int = false;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // Not an exponent suffix (e.g. a following symbol); back off.
                self.pos = mark;
            }
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("digits are ascii");
        let value: f64 = text
            .parse()
            .map_err(|_| self.err(format!("invalid number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.err(format!("number `{text}` overflows")));
        }
        self.skip_ws();
        Ok((value, is_int))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new(1, 1, &["t1", "x1", "y1"], &[(-1.0, 1.0); 3]).unwrap()
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_expr("1 + * 2", &chart()).unwrap_err();
        match err {
            FmanError::Syntax { pos, .. } => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_symbol_is_named() {
        let err = parse_expr("t1 + q7", &chart()).unwrap_err();
        match err {
            FmanError::UnknownSymbol { name, .. } => assert_eq!(name, "q7"),
            other => panic!("expected unknown symbol, got {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let c = chart();
        let e = parse_expr("1 - 2 - 3", &c).unwrap();
        assert_eq!(e.eval_value(&[0.0; 3]).unwrap(), -4.0);
        let e = parse_expr("2 + 3*4^2", &c).unwrap();
        assert_eq!(e.eval_value(&[0.0; 3]).unwrap(), 50.0);
        let e = parse_expr("12/2/3", &c).unwrap();
        assert_eq!(e.eval_value(&[0.0; 3]).unwrap(), 2.0);
    }

    #[test]
    fn scientific_notation() {
        let c = chart();
        let e = parse_expr("1e-5 + 2.5E2", &c).unwrap();
        assert_eq!(e.eval_value(&[0.0; 3]).unwrap(), 1e-5 + 250.0);
    }

    #[test]
    fn unary_minus_binds_before_power() {
        // Per the grammar, `-x^2` is `(-x)^2`.
        let c = chart();
        let e = parse_expr("-x1^2", &c).unwrap();
        assert_eq!(e.eval_value(&[0.0, 3.0, 0.0]).unwrap(), 9.0);
    }
}
