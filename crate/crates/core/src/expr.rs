//! Small math expression language for user-defined surfaces, curves and
//! variation fields.
//!
//! Grammar (documented in the README, kept bit-exact):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := unary ('^' factor)?          -- '^' is right-associative
//! unary  := '-'? atom
//! atom   := number | ident | fn '(' expr ')' | '(' expr ')'
//! ```
//!
//! Identifiers are restricted to the variable names a caller binds (for
//! surfaces `u`, `v`; for curves and variation fields `s`, optionally `l`).
//! Functions are `sin, cos, exp, log, sqrt, atan`, all unary. There are no
//! conditionals, so every expression stays smooth and jet evaluation is total.

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Unary functions usable in expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "atan" => Some(Func::Atan),
            _ => None,
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    /// Index into the variable-name list the expression was parsed against.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// `base ^ exponent`; an integer-literal exponent is applied by repeated
    /// multiplication, anything else goes through exp/log.
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate with the given jets bound to the variables, positionally
    /// matching the names the expression was parsed with.
    pub fn eval(&self, vars: &[Jet]) -> Result<Jet> {
        let order = vars
            .first()
            .map(|j| j.order())
            .expect("eval requires at least one bound variable");
        match self {
            Expr::Number(x) => Jet::constant(*x, order),
            Expr::Var(i) => Ok(vars[*i].clone()),
            Expr::Neg(a) => Ok(a.eval(vars)?.neg()),
            Expr::Add(a, b) => Ok(a.eval(vars)?.add(&b.eval(vars)?)),
            Expr::Sub(a, b) => Ok(a.eval(vars)?.sub(&b.eval(vars)?)),
            Expr::Mul(a, b) => Ok(a.eval(vars)?.mul(&b.eval(vars)?)),
            Expr::Div(a, b) => a.eval(vars)?.div(&b.eval(vars)?),
            Expr::Pow(a, b) => {
                let base = a.eval(vars)?;
                let exponent = b.eval(vars)?;
                // a constant integer exponent is applied exactly; anything
                // else goes through exp/log and needs a positive base
                let constant = exponent.coeffs()[1..].iter().all(|c| *c == 0.0);
                let e = exponent.value();
                if constant && e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
                    return base.powi(e as i32);
                }
                Ok(exponent.mul(&base.ln()?).exp())
            }
            Expr::Call(f, a) => {
                let arg = a.eval(vars)?;
                match f {
                    Func::Sin => Ok(arg.sin()),
                    Func::Cos => Ok(arg.cos()),
                    Func::Exp => Ok(arg.exp()),
                    Func::Log => arg.ln(),
                    Func::Sqrt => arg.sqrt(),
                    Func::Atan => Ok(arg.atan()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Token, usize)>> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let c = self.bytes[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((Token::Plus, start));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((Token::Minus, start));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((Token::Star, start));
                    self.pos += 1;
                }
                b'/' => {
                    out.push((Token::Slash, start));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((Token::Caret, start));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((Token::LParen, start));
                    self.pos += 1;
                }
                b')' => {
                    out.push((Token::RParen, start));
                    self.pos += 1;
                }
                b',' => {
                    out.push((Token::Comma, start));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'.' => {
                    let tok = self.lex_number()?;
                    out.push((tok, start));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    while self.pos < self.bytes.len()
                        && (self.bytes[self.pos].is_ascii_alphanumeric()
                            || self.bytes[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    out.push((Token::Ident(self.src[start..self.pos].to_string()), start));
                }
                other => {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    });
                }
            }
        }
        Ok(out)
    }

    fn lex_number(&mut self) -> Result<Token> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.bytes.len() && (self.bytes[self.pos] | 32) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all (e.g. an identifier follows)
                self.pos = mark;
            }
        }
        self.src[start..self.pos].parse::<f64>().map(Token::Number).map_err(|_| Error::Parse {
            offset: start,
            message: format!("malformed number `{}`", &self.src[start..self.pos]),
        })
    }
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.atom()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.bump() {
            Some(Token::Number(x)) => Ok(Expr::Number(x)),
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name).ok_or_else(|| Error::UnknownIdentifier {
                        name: name.clone(),
                        offset,
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "`)` closing the function call")?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else if let Some(idx) = self.vars.iter().position(|v| *v == name) {
                    Ok(Expr::Var(idx))
                } else {
                    Err(Error::UnknownIdentifier { name, offset })
                }
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(Error::Parse {
                offset,
                message: "expected a number, variable, function call or `(`".into(),
            }),
        }
    }
}

/// Parse a single expression over the given variable names.
pub fn parse_expr(src: &str, vars: &[&str]) -> Result<Expr> {
    let tokens = Lexer::new(src).tokenize()?;
    let end = src.len();
    let mut parser = Parser {
        tokens,
        pos: 0,
        vars,
        end,
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::Parse {
            offset: parser.offset(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr)
}

/// Parse a parenthesized triple `(e1, e2, e3)` of component expressions.
pub fn parse_triple(src: &str, vars: &[&str]) -> Result<[Expr; 3]> {
    let tokens = Lexer::new(src).tokenize()?;
    let end = src.len();
    let mut parser = Parser {
        tokens,
        pos: 0,
        vars,
        end,
    };
    parser.expect(Token::LParen, "`(` opening the component list")?;
    let e1 = parser.expr()?;
    parser.expect(Token::Comma, "`,` between components")?;
    let e2 = parser.expr()?;
    parser.expect(Token::Comma, "`,` between components")?;
    let e3 = parser.expr()?;
    parser.expect(Token::RParen, "`)` closing the component list")?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::Parse {
            offset: parser.offset(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok([e1, e2, e3])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(src: &str, s: f64) -> f64 {
        let e = parse_expr(src, &["s"]).unwrap();
        e.eval(&[Jet::variable(s, 3).unwrap()]).unwrap().value()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval1("1+2*3", 0.0), 7.0);
        assert_eq!(eval1("2*3+1", 0.0), 7.0);
        assert_eq!(eval1("2^3^2", 0.0), 512.0); // right-associative
        assert_eq!(eval1("-2^2", 0.0), 4.0); // unary binds inside the power
        assert_eq!(eval1("8/4/2", 0.0), 1.0);
        assert_eq!(eval1("s^3", 2.0), 8.0);
        assert_eq!(eval1("2e-1*s", 1.0), 0.2);
    }

    #[test]
    fn triple_parses_and_evaluates() {
        let comps = parse_triple("(cos(u), sin(u), v)", &["u", "v"]).unwrap();
        let u = Jet::constant(0.0, 2).unwrap();
        let v = Jet::constant(0.0, 2).unwrap();
        let vals: Vec<f64> = comps
            .iter()
            .map(|c| c.eval(&[u.clone(), v.clone()]).unwrap().value())
            .collect();
        assert_eq!(vals, vec![1.0, 0.0, 0.0]);

        let comps =
            parse_triple("((2+cos(u))*cos(v), (2+cos(u))*sin(v), sin(u))", &["u", "v"]).unwrap();
        let vals: Vec<f64> = comps
            .iter()
            .map(|c| c.eval(&[u.clone(), v.clone()]).unwrap().value())
            .collect();
        assert_eq!(vals, vec![3.0, 0.0, 0.0]);
    }

    #[test]
    fn error_positions() {
        match parse_expr("cos(u", &["u"]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_expr("2 + w", &["u", "v"]) {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "w");
                assert_eq!(offset, 4);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match parse_expr("2 ? 3", &["u"]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        // `tan` is not in the function set
        assert!(parse_expr("tan(u)", &["u"]).is_err());
    }

    #[test]
    fn derivatives_propagate() {
        let e = parse_expr("sin(s)^3", &["s"]).unwrap();
        let jet = e.eval(&[Jet::variable(0.0, 3).unwrap()]).unwrap();
        // sin^3(s) = s^3 - s^5/2 + ...: value and first two derivatives vanish
        assert!(jet.coeffs()[0].abs() < 1e-15);
        assert!(jet.coeffs()[1].abs() < 1e-15);
        assert!(jet.coeffs()[2].abs() < 1e-15);
        assert!((jet.coeffs()[3] - 1.0).abs() < 1e-15);
    }
}
