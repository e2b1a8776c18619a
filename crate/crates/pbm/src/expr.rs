//! Expressions in `t`, `x`, `y` for Hamiltonians, coefficients and matrix entries.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Atan,
    Abs,
}

const FUNCS: [(&str, Func); 9] = [
    ("sin", Func::Sin),
    ("cos", Func::Cos),
    ("tan", Func::Tan),
    ("exp", Func::Exp),
    ("log", Func::Log),
    ("sqrt", Func::Sqrt),
    ("tanh", Func::Tanh),
    ("atan", Func::Atan),
    ("abs", Func::Abs),
];

impl Func {
    pub fn name(self) -> &'static str {
        FUNCS.iter().find(|(_, f)| *f == self).map(|(n, _)| *n).unwrap()
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Tanh => v.tanh(),
            Func::Atan => v.atan(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {found:?} at offset {offset}")]
    UnexpectedChar { offset: usize, found: char },
    #[error("unexpected end of input at offset {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("malformed number at offset {offset}")]
    BadNumber { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::UnexpectedChar { offset, .. }
            | ParseError::UnexpectedEnd { offset }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::BadNumber { offset } => *offset,
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn unexpected(&mut self) -> ParseError {
        match self.peek() {
            Some(found) => ParseError::UnexpectedChar { offset: self.pos, found },
            None => ParseError::UnexpectedEnd { offset: self.pos },
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
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

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            // right associative, and `2^-1` is allowed
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let v: f64 = self.src[start..end].parse().map_err(|_| ParseError::BadNumber { offset: start })?;
        self.pos = end;
        Ok(Expr::Num(v))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        let name = &self.src[start..end];
        self.pos = end;
        let atom = match name {
            "t" => Expr::Var(Var::T),
            "x" => Expr::Var(Var::X),
            "y" => Expr::Var(Var::Y),
            "pi" => Expr::Const(Constant::Pi),
            "e" => Expr::Const(Constant::E),
            _ => {
                let Some(&(_, f)) = FUNCS.iter().find(|(n, _)| *n == name) else {
                    return Err(ParseError::UnknownIdentifier { offset: start, name: name.to_string() });
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                return Ok(Expr::Call(f, Box::new(arg)));
            }
        };
        Ok(atom)
    }
}

/// Parses with the usual precedence: `^` (right associative) above unary
/// minus above `*`, `/` above `+`, `-`. Errors carry byte offsets.
pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.unexpected());
    }
    Ok(e)
}

fn num(v: f64) -> Expr {
    if v < 0.0 {
        Expr::Neg(Box::new(Expr::Num(-v)))
    } else {
        Expr::Num(v)
    }
}

fn value(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        Expr::Neg(a) => value(a).map(|v| -v),
        _ => None,
    }
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}

fn add(a: Expr, b: Expr) -> Expr {
    match (value(&a), value(&b)) {
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        (Some(u), Some(v)) => num(u + v),
        _ => bin(BinOp::Add, a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (value(&a), value(&b)) {
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        (Some(u), Some(v)) => num(u - v),
        _ => bin(BinOp::Sub, a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (value(&a), value(&b)) {
        (Some(0.0), _) | (_, Some(0.0)) => Expr::Num(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        (Some(u), Some(v)) => num(u * v),
        _ => bin(BinOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (value(&a), value(&b)) {
        (Some(0.0), _) => Expr::Num(0.0),
        (_, Some(1.0)) => a,
        _ => bin(BinOp::Div, a, b),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(0.0) => Expr::Num(0.0),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl Expr {
    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Const(Constant::Pi) => std::f64::consts::PI,
            Expr::Const(Constant::E) => std::f64::consts::E,
            Expr::Neg(a) => -a.eval(t, x, y),
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.eval(t, x, y), b.eval(t, x, y));
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => u / v,
                    BinOp::Pow => u.powf(v),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(t, x, y)),
        }
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(var),
            Expr::Bin(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Symbolic partial derivative, lightly simplified.
    pub fn derivative(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) | Expr::Const(_) => Expr::Num(0.0),
            Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.derivative(var)),
            Expr::Bin(op, a, b) => {
                let (da, db) = (a.derivative(var), b.derivative(var));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                    BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), bin(BinOp::Pow, b, Expr::Num(2.0))),
                    BinOp::Pow if !b.uses(var) => {
                        let lowered = match value(&b) {
                            Some(v) => num(v - 1.0),
                            None => sub(b.clone(), Expr::Num(1.0)),
                        };
                        let power = match value(&lowered) {
                            Some(1.0) => a.clone(),
                            _ => bin(BinOp::Pow, a, lowered),
                        };
                        mul(mul(b, power), da)
                    }
                    BinOp::Pow => {
                        let whole = bin(BinOp::Pow, a.clone(), b.clone());
                        let inner = add(mul(db, call(Func::Log, a.clone())), div(mul(b, da), a));
                        mul(whole, inner)
                    }
                }
            }
            Expr::Call(f, a) => {
                let da = a.derivative(var);
                if value(&da) == Some(0.0) {
                    return Expr::Num(0.0);
                }
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Tan => div(Expr::Num(1.0), bin(BinOp::Pow, call(Func::Cos, u), Expr::Num(2.0))),
                    Func::Exp => call(Func::Exp, u),
                    Func::Log => div(Expr::Num(1.0), u),
                    Func::Sqrt => div(Expr::Num(1.0), mul(Expr::Num(2.0), call(Func::Sqrt, u))),
                    Func::Tanh => sub(Expr::Num(1.0), bin(BinOp::Pow, call(Func::Tanh, u), Expr::Num(2.0))),
                    Func::Atan => div(Expr::Num(1.0), add(Expr::Num(1.0), bin(BinOp::Pow, u, Expr::Num(2.0)))),
                    Func::Abs => div(u.clone(), call(Func::Abs, u)),
                };
                mul(outer, da)
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Neg(a) => write!(f, "-{}", Wrapped(a, a.precedence() < 3)),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                let (left, right) = if *op == BinOp::Pow {
                    (a.precedence() <= p, b.precedence() < 3)
                } else {
                    (a.precedence() < p, b.precedence() <= p)
                };
                write!(f, "{}{}{}", Wrapped(a, left), op.symbol(), Wrapped(b, right))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("2^3^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 512.0);
        let e = parse_expression("-x^2").unwrap();
        assert_eq!(e.eval(0.0, 3.0, 0.0), -9.0);
        let e = parse_expression("8/4/2 - 1 - 1").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), -1.0);
        let e = parse_expression("2^-1").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 0.5);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse_expression("x +"), Err(ParseError::UnexpectedEnd { offset: 3 }));
        assert_eq!(
            parse_expression("1 + foo(x)"),
            Err(ParseError::UnknownIdentifier { offset: 4, name: "foo".into() })
        );
        assert_eq!(parse_expression("(x"), Err(ParseError::UnexpectedEnd { offset: 2 }));
        assert_eq!(parse_expression("x y").unwrap_err().offset(), 2);
    }

    #[test]
    fn derivative_of_polynomial() {
        let e = parse_expression("x^3 + 2*x*y").unwrap();
        let d = e.derivative(Var::X);
        assert_eq!(d.eval(0.0, 2.0, 5.0), 22.0);
        assert!(!d.derivative(Var::X).derivative(Var::X).uses(Var::Y));
    }
}
