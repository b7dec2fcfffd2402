//! A small expression language for user-supplied energy functions.
//!
//! Grammar:
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := unary ('^' factor)?          // '^' is right-associative
//! unary  := '-'? base
//! base   := number | 'x' | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Derivatives are symbolic; the only simplification applied is constant
//! folding of literal arithmetic, so evaluation stays noise-free at large x.

use crate::error::{Error, Result};
use crate::special;
use std::fmt;

/// Functions the language knows how to evaluate and differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
    Lgamma,
    Digamma,
    Trigamma,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Lgamma => "lgamma",
            Func::Digamma => "digamma",
            Func::Trigamma => "trigamma",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "lgamma" => Func::Lgamma,
            "digamma" => Func::Digamma,
            "trigamma" => Func::Trigamma,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    fn eval(self, v: f64) -> f64 {
        match self {
            Func::Ln => v.ln(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Lgamma => special::ln_gamma(v),
            Func::Digamma => special::digamma(v),
            Func::Trigamma => special::trigamma(v),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
        }
    }
}

/// Expression AST over a single variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpressionAst {
    Num(f64),
    Var,
    Add(Box<ExpressionAst>, Box<ExpressionAst>),
    Sub(Box<ExpressionAst>, Box<ExpressionAst>),
    Mul(Box<ExpressionAst>, Box<ExpressionAst>),
    Div(Box<ExpressionAst>, Box<ExpressionAst>),
    Pow(Box<ExpressionAst>, Box<ExpressionAst>),
    Neg(Box<ExpressionAst>),
    Fn(Func, Box<ExpressionAst>),
}

use ExpressionAst as Ast;

impl fmt::Display for ExpressionAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(v) => write!(f, "{v}"),
            Ast::Var => write!(f, "x"),
            Ast::Add(a, b) => write!(f, "({a} + {b})"),
            Ast::Sub(a, b) => write!(f, "({a} - {b})"),
            Ast::Mul(a, b) => write!(f, "({a} * {b})"),
            Ast::Div(a, b) => write!(f, "({a} / {b})"),
            Ast::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Ast::Neg(a) => write!(f, "(-{a})"),
            Ast::Fn(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Ast> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.factor()?; // right-associative
            return Ok(Ast::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.base()?)));
        }
        self.base()
    }

    fn base(&mut self) -> Result<Ast> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                if name == "x" {
                    return Ok(Ast::Var);
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(Error::UnknownIdentifier {
                        name: name.to_string(),
                        offset: start,
                    });
                };
                if self.peek() != Some(b'(') {
                    return Err(self.err(format!("expected `(` after `{name}`")));
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(Ast::Fn(func, Box::new(arg)))
            }
            Some(_) => Err(self.err("expected number, `x`, function call or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Ast> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_digit() || *b == b'.')
        {
            self.pos += 1;
        }
        // exponent part
        if self.bytes.get(self.pos).is_some_and(|b| *b == b'e' || *b == b'E') {
            let mut look = self.pos + 1;
            if self.bytes.get(look).is_some_and(|b| *b == b'+' || *b == b'-') {
                look += 1;
            }
            if self.bytes.get(look).is_some_and(|b| b.is_ascii_digit()) {
                self.pos = look;
                while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>().map(Ast::Num).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }
}

/// Parse an expression in the grammar above.
pub fn parse_energy_expression(text: &str) -> Result<ExpressionAst> {
    if text.is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    if !text.is_ascii() {
        return Err(Error::Syntax {
            offset: 0,
            message: "expression must be ASCII".into(),
        });
    }
    let mut p = Parser::new(text);
    let ast = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(ast)
}

impl ExpressionAst {
    /// Evaluate at x.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Ast::Num(v) => *v,
            Ast::Var => x,
            Ast::Add(a, b) => a.eval(x) + b.eval(x),
            Ast::Sub(a, b) => a.eval(x) - b.eval(x),
            Ast::Mul(a, b) => a.eval(x) * b.eval(x),
            Ast::Div(a, b) => a.eval(x) / b.eval(x),
            Ast::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Ast::Neg(a) => -a.eval(x),
            Ast::Fn(f, a) => f.eval(a.eval(x)),
        }
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Ast::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }
}

fn num(v: f64) -> Ast {
    Ast::Num(v)
}

fn add(a: Ast, b: Ast) -> Ast {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => num(x + y),
        _ if a.is_const(0.0) => b,
        _ if b.is_const(0.0) => a,
        _ => Ast::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Ast, b: Ast) -> Ast {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => num(x - y),
        _ if b.is_const(0.0) => a,
        _ if a.is_const(0.0) => Ast::Neg(Box::new(b)),
        _ => Ast::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Ast, b: Ast) -> Ast {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => num(x * y),
        _ if a.is_const(0.0) || b.is_const(0.0) => num(0.0),
        _ if a.is_const(1.0) => b,
        _ if b.is_const(1.0) => a,
        _ => Ast::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Ast, b: Ast) -> Ast {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => num(x / y),
        _ if a.is_const(0.0) => num(0.0),
        _ if b.is_const(1.0) => a,
        _ => Ast::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Ast, b: Ast) -> Ast {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => num(x.powf(y)),
        _ if b.is_const(1.0) => a,
        _ if b.is_const(0.0) => num(1.0),
        _ => Ast::Pow(Box::new(a), Box::new(b)),
    }
}

/// Exact symbolic derivative with constant folding.
pub fn differentiate(ast: &ExpressionAst) -> Result<ExpressionAst> {
    Ok(match ast {
        Ast::Num(_) => num(0.0),
        Ast::Var => num(1.0),
        Ast::Add(a, b) => add(differentiate(a)?, differentiate(b)?),
        Ast::Sub(a, b) => sub(differentiate(a)?, differentiate(b)?),
        Ast::Mul(a, b) => add(
            mul(differentiate(a)?, (**b).clone()),
            mul((**a).clone(), differentiate(b)?),
        ),
        Ast::Div(a, b) => div(
            sub(
                mul(differentiate(a)?, (**b).clone()),
                mul((**a).clone(), differentiate(b)?),
            ),
            pow((**b).clone(), num(2.0)),
        ),
        Ast::Pow(a, b) => {
            let da = differentiate(a)?;
            match b.as_const() {
                // f^c -> c f^{c-1} f'
                Some(c) => mul(
                    mul(num(c), pow((**a).clone(), num(c - 1.0))),
                    da,
                ),
                // f^g -> f^g (g' ln f + g f'/f)
                None => {
                    let db = differentiate(b)?;
                    mul(
                        ast.clone(),
                        add(
                            mul(db, Ast::Fn(Func::Ln, a.clone())),
                            mul((**b).clone(), div(da, (**a).clone())),
                        ),
                    )
                }
            }
        }
        Ast::Neg(a) => match differentiate(a)? {
            Ast::Num(v) => num(-v),
            d => Ast::Neg(Box::new(d)),
        },
        Ast::Fn(f, a) => {
            let da = differentiate(a)?;
            let outer = match f {
                Func::Ln => div(num(1.0), (**a).clone()),
                Func::Exp => ast.clone(),
                Func::Sqrt => div(num(0.5), Ast::Fn(Func::Sqrt, a.clone())),
                Func::Lgamma => Ast::Fn(Func::Digamma, a.clone()),
                Func::Digamma => Ast::Fn(Func::Trigamma, a.clone()),
                Func::Trigamma => {
                    return Err(Error::UnsupportedDerivative("trigamma".into()));
                }
                Func::Sin => Ast::Fn(Func::Cos, a.clone()),
                Func::Cos => Ast::Neg(Box::new(Ast::Fn(Func::Sin, a.clone()))),
            };
            mul(outer, da)
        }
    })
}
