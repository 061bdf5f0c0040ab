//! A small expression language in one variable, for user-supplied profiles.
//!
//! Grammar (loosest first):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! so `^` is right-associative and binds tighter than unary minus:
//! `-2^2 = -4`, `2^3^2 = 512`, `2^-1 = 0.5`. Identifiers are the variable,
//! `pi`, and the functions `sin`, `cos`, `exp`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::catalog::{HProfile, RevolutionProfile};
use crate::error::CheckError;
use crate::jet::Jet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// An expression together with the name of its variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedExpr {
    pub var: String,
    pub expr: Expr,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse {
            offset,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let start = match self.peek() {
            None => return self.err(self.pos, "unexpected end of input"),
            Some(_) => self.pos,
        };
        let rest = &self.src[start..];
        let c = rest.chars().next().unwrap_or(' ');
        if c == '(' {
            self.pos += 1;
            let e = self.sum()?;
            if !self.eat(')') {
                return self.err(self.pos, "expected ')'");
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest.find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_')).unwrap_or(rest.len());
            let ident = &rest[..len];
            self.pos += len;
            let func = match ident {
                "sin" => Some(Func::Sin),
                "cos" => Some(Func::Cos),
                "exp" => Some(Func::Exp),
                _ => None,
            };
            if let Some(f) = func {
                if !self.eat('(') {
                    return self.err(self.pos, format!("expected '(' after {ident}"));
                }
                let arg = self.sum()?;
                if !self.eat(')') {
                    return self.err(self.pos, "expected ')'");
                }
                return Ok(Expr::Call(f, Box::new(arg)));
            }
            if ident == self.var {
                return Ok(Expr::Var);
            }
            if ident == "pi" {
                return Ok(Expr::Pi);
            }
            return self.err(start, format!("unknown identifier '{ident}'"));
        }
        self.err(start, format!("unexpected character '{c}'"))
    }

    fn number(&mut self, start: usize) -> Result<Expr, ExprError> {
        let b = self.src.as_bytes();
        let mut i = start;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < b.len() && b[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let mut n = digits(&mut i);
        if i < b.len() && b[i] == b'.' {
            i += 1;
            n += digits(&mut i);
        }
        if n == 0 {
            return self.err(start, "malformed number");
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) == 0 {
                return self.err(i, "malformed exponent");
            }
            i = j;
        }
        let text = &self.src[start..i];
        self.pos = i;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => self.err(start, format!("number out of range: {text}")),
        }
    }
}

impl ParsedExpr {
    /// Parses `src` with variable name `var`.
    pub fn parse(src: &str, var: &str) -> Result<ParsedExpr, ExprError> {
        if var == "pi" || matches!(var, "sin" | "cos" | "exp") {
            return Err(ExprError::Unsupported(format!("'{var}' is reserved")));
        }
        let mut p = Parser { src, pos: 0, var };
        let expr = p.sum()?;
        if p.peek().is_some() {
            return p.err(p.pos, "unexpected trailing input");
        }
        Ok(ParsedExpr { var: var.to_string(), expr })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(&x)
    }

    pub fn eval_jet(&self, x: &Jet) -> Jet {
        self.expr.eval(x)
    }

    pub fn derivative(&self) -> Result<ParsedExpr, ExprError> {
        Ok(ParsedExpr {
            var: self.var.clone(),
            expr: self.expr.derivative()?,
        })
    }
}

impl fmt::Display for ParsedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write(f, &self.var, 0)
    }
}

/// Values an expression can be evaluated on.
pub trait ExprValue: Sized {
    fn lift(&self, c: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn powi(&self, p: i32) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn ln(&self) -> Self;
    fn call(&self, f: Func) -> Self;
}

impl ExprValue for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn add(&self, o: &f64) -> f64 {
        self + o
    }
    fn sub(&self, o: &f64) -> f64 {
        self - o
    }
    fn mul(&self, o: &f64) -> f64 {
        self * o
    }
    fn div(&self, o: &f64) -> f64 {
        self / o
    }
    fn neg(&self) -> f64 {
        -self
    }
    fn powi(&self, p: i32) -> f64 {
        f64::powi(*self, p)
    }
    fn powf(&self, p: f64) -> f64 {
        f64::powf(*self, p)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn call(&self, f: Func) -> f64 {
        match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
        }
    }
}

impl ExprValue for Jet {
    fn lift(&self, c: f64) -> Jet {
        Jet::constant(self.table(), c)
    }
    fn add(&self, o: &Jet) -> Jet {
        self + o
    }
    fn sub(&self, o: &Jet) -> Jet {
        self - o
    }
    fn mul(&self, o: &Jet) -> Jet {
        self * o
    }
    fn div(&self, o: &Jet) -> Jet {
        self / o
    }
    fn neg(&self) -> Jet {
        -self
    }
    fn powi(&self, p: i32) -> Jet {
        Jet::powi(self, p)
    }
    fn powf(&self, p: f64) -> Jet {
        Jet::powf(self, p)
    }
    fn ln(&self) -> Jet {
        Jet::ln(self)
    }
    fn call(&self, f: Func) -> Jet {
        match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
        }
    }
}

impl Expr {
    pub fn has_var(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.has_var(),
            Expr::Bin(_, a, b) => a.has_var() || b.has_var(),
        }
    }

    pub fn eval<T: ExprValue + Clone>(&self, x: &T) -> T {
        match self {
            Expr::Num(v) => x.lift(*v),
            Expr::Pi => x.lift(PI),
            Expr::Var => x.clone(),
            Expr::Neg(e) => e.eval(x).neg(),
            Expr::Call(f, e) => e.eval(x).call(*f),
            Expr::Bin(op, a, b) => {
                if *op == BinOp::Pow {
                    let base = a.eval(x);
                    if !b.has_var() {
                        let p = b.eval(&0.0f64);
                        if p.fract() == 0.0 && p.abs() <= 64.0 {
                            return base.powi(p as i32);
                        }
                        return base.powf(p);
                    }
                    return b.eval(x).mul(&base.ln()).call(Func::Exp);
                }
                let (l, r) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => l.add(&r),
                    BinOp::Sub => l.sub(&r),
                    BinOp::Mul => l.mul(&r),
                    BinOp::Div => l.div(&r),
                    BinOp::Pow => unreachable!(),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, var: &str, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "-{}", -v)?,
            Expr::Num(v) => write!(f, "{v}")?,
            Expr::Var => f.write_str(var)?,
            Expr::Pi => f.write_str("pi")?,
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write(f, var, 3)?;
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.write(f, var, 0)?;
                f.write_str(")")?;
            }
            Expr::Bin(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                a.write(f, var, lmin)?;
                f.write_str(sym)?;
                b.write(f, var, rmin)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }

    fn is_num(&self, v: f64) -> bool {
        matches!(self, Expr::Num(x) if *x == v)
    }

    fn add(a: Expr, b: Expr) -> Expr {
        if a.is_num(0.0) {
            b
        } else if b.is_num(0.0) {
            a
        } else {
            Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
        }
    }

    fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_num(0.0) {
            a
        } else if a.is_num(0.0) {
            Expr::Neg(Box::new(b))
        } else {
            Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))
        }
    }

    fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_num(0.0) || b.is_num(0.0) {
            Expr::Num(0.0)
        } else if a.is_num(1.0) {
            b
        } else if b.is_num(1.0) {
            a
        } else {
            Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))
        }
    }

    fn div(a: Expr, b: Expr) -> Expr {
        if a.is_num(0.0) {
            Expr::Num(0.0)
        } else if b.is_num(1.0) {
            a
        } else {
            Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
        }
    }

    fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(v) if v == 0.0 => Expr::Num(0.0),
            Expr::Neg(e) => *e,
            e => Expr::Neg(Box::new(e)),
        }
    }

    /// Symbolic derivative in the variable. Exponents depending on the
    /// variable have no representable derivative (there is no `ln`).
    pub fn derivative(&self) -> Result<Expr, ExprError> {
        Ok(match self {
            Expr::Num(_) | Expr::Pi => Expr::Num(0.0),
            Expr::Var => Expr::Num(1.0),
            Expr::Neg(e) => Expr::neg(e.derivative()?),
            Expr::Call(func, e) => {
                let inner = e.derivative()?;
                let outer = match func {
                    Func::Sin => Expr::Call(Func::Cos, e.clone()),
                    Func::Cos => Expr::neg(Expr::Call(Func::Sin, e.clone())),
                    Func::Exp => Expr::Call(Func::Exp, e.clone()),
                };
                Expr::mul(outer, inner)
            }
            Expr::Bin(op, a, b) => {
                let (da, db) = (a.derivative()?, b.derivative()?);
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                    BinOp::Div => Expr::div(
                        Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                        Expr::Bin(BinOp::Pow, Box::new(b), Box::new(Expr::Num(2.0))),
                    ),
                    BinOp::Pow => {
                        if b.has_var() {
                            return Err(ExprError::Unsupported(
                                "derivative of a power with a variable exponent".into(),
                            ));
                        }
                        let lowered = match &b {
                            Expr::Num(p) if *p >= 1.0 => Expr::Num(p - 1.0),
                            Expr::Num(p) => Expr::Neg(Box::new(Expr::Num(1.0 - p))),
                            other => Expr::sub(other.clone(), Expr::Num(1.0)),
                        };
                        let power = if lowered.is_num(1.0) {
                            a.clone()
                        } else if lowered.is_num(0.0) {
                            Expr::Num(1.0)
                        } else {
                            Expr::Bin(BinOp::Pow, Box::new(a), Box::new(lowered))
                        };
                        Expr::mul(Expr::mul(b, power), da)
                    }
                }
            }
        })
    }
}

/// `H(u)` for the disc example from an expression in `u`.
pub fn h_profile(src: &str) -> Result<HProfile, CheckError> {
    let e = ParsedExpr::parse(src, "u").map_err(|e| CheckError::InvalidProfile(e.to_string()))?;
    let d = e.derivative().map_err(|e| CheckError::InvalidProfile(e.to_string()))?;
    let (e, d) = (Arc::new(e), Arc::new(d));
    HProfile::new(src, Arc::new(move |u: &Jet| e.eval_jet(u)), Arc::new(move |u: &Jet| d.eval_jet(u)))
}

/// A revolution profile `f(r)` from an expression in `r`.
pub fn revolution_profile(src: &str, length: f64, alpha1: i64, alpha2: i64) -> Result<RevolutionProfile, CheckError> {
    let e = Arc::new(ParsedExpr::parse(src, "r").map_err(|e| CheckError::InvalidProfile(e.to_string()))?);
    RevolutionProfile::new(src, Arc::new(move |r: &Jet| e.eval_jet(r)), length, alpha1, alpha2)
}
