//! Closed-form scalar expressions over chart coordinates.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! The right operand of `^` must fold to a numeric constant; it is stored
//! directly in [`Expr::Pow`]. Identifiers are chart coordinates or one of the
//! functions in [`Func`].

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{EvalError, ParseError};
use crate::jet::Jet2;

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Value, first and second derivative at `u`.
    fn taylor(self, u: f64) -> Result<(f64, f64, f64), EvalError> {
        Ok(match self {
            Func::Exp => {
                let e = libm::exp(u);
                (e, e, e)
            }
            Func::Log => {
                if u <= 0.0 {
                    return Err(EvalError::LogDomain(u));
                }
                (libm::log(u), 1.0 / u, -1.0 / (u * u))
            }
            Func::Sin => {
                let (s, c) = (libm::sin(u), libm::cos(u));
                (s, c, -s)
            }
            Func::Cos => {
                let (s, c) = (libm::sin(u), libm::cos(u));
                (c, -s, -c)
            }
            Func::Sinh => {
                let (s, c) = (libm::sinh(u), libm::cosh(u));
                (s, c, s)
            }
            Func::Cosh => {
                let (s, c) = (libm::sinh(u), libm::cosh(u));
                (c, s, c)
            }
            Func::Sqrt => {
                if u <= 0.0 {
                    return Err(EvalError::SqrtDomain(u));
                }
                let r = libm::sqrt(u);
                (r, 0.5 / r, -0.25 / (r * u))
            }
        })
    }
}

/// Parsed scalar expression. Trees are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Non-negative finite literal. Negative values are `Neg(Const)`.
    Const(f64),
    /// Index into the chart coordinates.
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Numeric constant in canonical form (negative values wrapped in `Neg`).
    pub fn num(value: f64) -> Expr {
        debug_assert!(value.is_finite());
        if value < 0.0 || (value == 0.0 && value.is_sign_negative()) {
            Expr::Neg(Box::new(Expr::Const(-value)))
        } else {
            Expr::Const(value)
        }
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        Expr::Pow(Box::new(base), exponent)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Literal zero, the only constant the construction helpers fold on.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// `self + rhs`, dropping literal zeros.
    pub fn add(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            rhs
        } else if rhs.is_zero() {
            self
        } else {
            Expr::binary(BinOp::Add, self, rhs)
        }
    }

    /// `self * rhs`, folding literal zeros and ones.
    pub fn mul(self, rhs: Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            Expr::zero()
        } else if self.is_one() {
            rhs
        } else if rhs.is_one() {
            self
        } else {
            Expr::binary(BinOp::Mul, self, rhs)
        }
    }

    /// `self / rhs`, folding a literal zero numerator.
    pub fn div(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            Expr::zero()
        } else if rhs.is_one() {
            self
        } else {
            Expr::binary(BinOp::Div, self, rhs)
        }
    }

    /// Variables referenced anywhere in the tree.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.max_var(),
            Expr::Binary(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            },
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.depends_on(var),
            Expr::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// Replace every `Var(var)` with `replacement`.
    pub fn substitute(&self, var: usize, replacement: &Expr) -> Expr {
        self.map_vars(&|i| {
            if i == var {
                replacement.clone()
            } else {
                Expr::Var(i)
            }
        })
    }

    /// Rebuild the tree with each variable replaced by `f(index)`. Used to
    /// move expressions between charts.
    pub fn map_vars(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => f(*i),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_vars(f))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.map_vars(f)), Box::new(b.map_vars(f)))
            }
            Expr::Pow(e, p) => Expr::Pow(Box::new(e.map_vars(f)), *p),
            Expr::Call(func, e) => Expr::Call(*func, Box::new(e.map_vars(f))),
        }
    }

    /// Plain value at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *point.get(*i).ok_or(EvalError::Dimension {
                expected: *i + 1,
                got: point.len(),
            })?,
            Expr::Neg(e) => -e.eval(point)?,
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.eval(point)?, b.eval(point)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(e, p) => pow_taylor(e.eval(point)?, *p)?.0,
            Expr::Call(func, e) => func.taylor(e.eval(point)?)?.0,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Value, gradient and Hessian at `point` by forward propagation.
    pub fn jet(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        let n = point.len();
        let out = match self {
            Expr::Const(c) => Jet2::constant(n, *c),
            Expr::Var(i) => {
                if *i >= n {
                    return Err(EvalError::Dimension {
                        expected: *i + 1,
                        got: n,
                    });
                }
                Jet2::variable(n, *i, point[*i])
            }
            Expr::Neg(e) => e.jet(point)?.neg(),
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.jet(point)?, b.jet(point)?);
                match op {
                    BinOp::Add => x.add(&y),
                    BinOp::Sub => x.sub(&y),
                    BinOp::Mul => x.mul(&y),
                    BinOp::Div => {
                        if y.value == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        let v = y.value;
                        x.mul(&y.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
                    }
                }
            }
            Expr::Pow(e, p) => {
                let u = e.jet(point)?;
                let (f0, f1, f2) = pow_taylor(u.value, *p)?;
                u.chain(f0, f1, f2)
            }
            Expr::Call(func, e) => {
                let u = e.jet(point)?;
                let (f0, f1, f2) = func.taylor(u.value)?;
                u.chain(f0, f1, f2)
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Infix rendering with the given coordinate names.
    pub fn display<'a, S: AsRef<str>>(&'a self, names: &'a [S]) -> ExprDisplay<'a, S> {
        ExprDisplay { expr: self, names }
    }

    /// Infix rendering as an owned string.
    pub fn to_source<S: AsRef<str>>(&self, names: &[S]) -> String {
        self.display(names).to_string()
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow(_, _) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(_, _) => 5,
        }
    }
}

fn pow_taylor(u: f64, p: f64) -> Result<(f64, f64, f64), EvalError> {
    if p == 0.0 {
        return Ok((1.0, 0.0, 0.0));
    }
    let integral = libm::trunc(p) == p;
    if !integral && u <= 0.0 {
        return Err(EvalError::PowDomain {
            base: u,
            exponent: p,
        });
    }
    if u == 0.0 && p < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    let f0 = libm::pow(u, p);
    let f1 = if p == 1.0 { 1.0 } else { p * libm::pow(u, p - 1.0) };
    let f2 = if p == 1.0 || p == 2.0 {
        p * (p - 1.0)
    } else {
        p * (p - 1.0) * libm::pow(u, p - 2.0)
    };
    Ok((f0, f1, f2))
}

pub struct ExprDisplay<'a, S> {
    expr: &'a Expr,
    names: &'a [S],
}

impl<S: AsRef<str>> ExprDisplay<'_, S> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
        match e {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "(-{})", -c)
                } else {
                    write!(f, "{}", c)
                }
            }
            Expr::Var(i) => match self.names.get(*i) {
                Some(name) => f.write_str(name.as_ref()),
                None => write!(f, "${}", i),
            },
            Expr::Neg(inner) => {
                f.write_str("-")?;
                self.child(f, inner, inner.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                self.child(f, a, a.precedence() < p)?;
                f.write_str(op.symbol())?;
                self.child(f, b, b.precedence() <= p)
            }
            Expr::Pow(base, p) => {
                self.child(f, base, base.precedence() < 5)?;
                if *p < 0.0 {
                    write!(f, "^-{}", -p)
                } else {
                    write!(f, "^{}", p)
                }
            }
            Expr::Call(func, arg) => {
                write!(f, "{}(", func.name())?;
                self.write(f, arg)?;
                f.write_str(")")
            }
        }
    }

    fn child(&self, f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
        if paren {
            f.write_str("(")?;
            self.write(f, e)?;
            f.write_str(")")
        } else {
            self.write(f, e)
        }
    }
}

impl<S: AsRef<str>> fmt::Display for ExprDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr)
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
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => alloc::format!("number {}", v),
            Token::Ident(s) => alloc::format!("identifier `{}`", s),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    position: start,
                    expected: "a number",
                    found: alloc::format!("`{}`", text),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        position: start,
                        expected: "a finite number",
                        found: alloc::format!("`{}`", text),
                    });
                }
                out.push((start, Token::Number(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].into())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    position: start,
                    expected: "an expression character",
                    found: alloc::format!("`{}`", ch),
                });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((src.len(), Token::End));
    Ok(out)
}

struct Parser<'a, S> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    names: &'a [S],
    depth: usize,
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            position: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(ParseError::TooDeep {
                position: self.offset(),
            })
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let out = if *self.peek() == Token::Minus {
            self.bump();
            Expr::Neg(Box::new(self.unary()?))
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        if exponent.max_var().is_some() {
            return Err(ParseError::NonConstantExponent { position: at });
        }
        let value = exponent
            .eval(&[])
            .map_err(|_| ParseError::NonConstantExponent { position: at })?;
        Ok(Expr::Pow(Box::new(base), value))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Token::Number(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Token::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Token::LParen {
                        return Err(self.unexpected("`(` after function name"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Token::RParen {
                        return Err(self.unexpected("`)`"));
                    }
                    self.bump();
                    Ok(Expr::call(func, arg))
                } else if let Some(index) = self.names.iter().position(|n| n.as_ref() == name) {
                    Ok(Expr::Var(index))
                } else {
                    Err(ParseError::UnknownIdentifier { position: at, name })
                }
            }
            _ => Err(self.unexpected("a number, identifier or `(`")),
        }
    }
}

/// Parse `src` against the ordered coordinate names of a chart.
pub fn parse_expression<S: AsRef<str>>(src: &str, names: &[S]) -> Result<Expr, ParseError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        names,
        depth: 0,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn exp_of_linear_term_is_one_call() {
        let e = parse_expression("exp(2*t)", &names(&["t", "x", "y"])).unwrap();
        match e {
            Expr::Call(Func::Exp, arg) => {
                assert_eq!(
                    *arg,
                    Expr::binary(BinOp::Mul, Expr::Const(2.0), Expr::Var(0))
                );
            }
            other => panic!("unexpected tree {:?}", other),
        }
    }

    #[test]
    fn dangling_operator_reports_end_of_input() {
        let err = parse_expression("t + ", &names(&["t"])).unwrap_err();
        match err {
            ParseError::Syntax {
                position, found, ..
            } => {
                assert_eq!(position, 4);
                assert_eq!(found, "end of input");
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn reeb_component_of_the_nonconstant_kappa_cell() {
        let e = parse_expression("x - y*exp(-2*z)", &names(&["x", "y", "z"])).unwrap();
        let v = e.eval(&[1.0, 2.0, 0.5]).unwrap();
        assert!((v - (1.0 - 2.0 * libm::exp(-1.0))).abs() < 1e-15);
    }

    #[test]
    fn unknown_identifier_is_positioned() {
        let err = parse_expression("t + w", &names(&["t"])).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                position: 4,
                name: "w".into()
            }
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let n = names(&["a", "b", "c"]);
        let p = |s: &str| parse_expression(s, &n).unwrap().eval(&[2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p("a + b*c"), 14.0);
        assert_eq!(p("a - b - c"), -5.0);
        assert_eq!(p("c / a / a"), 1.0);
        assert_eq!(p("-a^2"), -4.0);
        assert_eq!(p("a^3^(1/3)^3"), 2.0f64.powf(3.0f64.powf(1.0 / 27.0)));
        assert_eq!(p("a^-1"), 0.5);
        assert_eq!(p("-(a - b)*c"), 4.0);
    }

    #[test]
    fn variable_exponent_is_rejected() {
        let err = parse_expression("t^t", &names(&["t"])).unwrap_err();
        assert!(matches!(err, ParseError::NonConstantExponent { position: 2 }));
    }

    #[test]
    fn function_name_requires_call() {
        assert!(parse_expression("exp", &names(&["t"])).is_err());
        assert!(parse_expression("t(1)", &names(&["t"])).is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src: String = core::iter::repeat('(').take(10_000).collect();
        assert!(matches!(
            parse_expression(&src, &names(&["t"])),
            Err(ParseError::TooDeep { .. })
        ));
        let src: String = core::iter::repeat('-').take(10_000).collect::<String>() + "t";
        assert!(parse_expression(&src, &names(&["t"])).is_err());
    }

    #[test]
    fn substitute_single_variable() {
        let src = names(&["t1"]);
        let e = parse_expression("exp(2*t1)", &src).unwrap();
        let out = e.substitute(0, &Expr::Var(1));
        assert_eq!(out.to_source(&names(&["t1", "s"])), "exp(2*s)");
    }

    #[test]
    fn substitute_absent_variable_is_identity() {
        let e = parse_expression("x", &names(&["x", "t"])).unwrap();
        assert_eq!(e.substitute(1, &Expr::Var(2)), e);
    }

    #[test]
    fn substitute_sewing_coordinate() {
        // chart (x1, y1, z1, s)
        let n = names(&["x1", "y1", "z1", "s"]);
        let e = parse_expression("exp(-2*z1)*y1", &n).unwrap();
        let out = e.substitute(2, &Expr::Var(3));
        assert_eq!(out, parse_expression("exp(-2*s)*y1", &n).unwrap());
    }

    #[test]
    fn printing_round_trips_awkward_shapes() {
        let n = names(&["x", "y"]);
        for src in [
            "x - -y",
            "-(x*y)",
            "(x^2)^3",
            "x - (y - 1)",
            "x/(y*x)",
            "--x",
            "-x*y",
            "(-x)^2",
            "-(2)",
            "x^-0.5",
            "0.1 + 1e-7*x",
        ] {
            let e = parse_expression(src, &n).unwrap();
            let printed = e.to_source(&n);
            assert_eq!(parse_expression(&printed, &n).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn num_helper_keeps_literals_non_negative() {
        let n: [&str; 0] = [];
        let e = Expr::num(-2.5);
        assert_eq!(parse_expression(&e.to_source(&n), &n).unwrap(), e);
        assert_eq!(e.eval(&[]).unwrap(), -2.5);
    }

    #[test]
    fn domain_errors() {
        let n = names(&["x"]);
        let at = |s: &str, x: f64| parse_expression(s, &n).unwrap().jet(&[x]);
        assert!(matches!(at("log(x)", 0.0), Err(EvalError::LogDomain(_))));
        assert!(matches!(at("sqrt(x)", -1.0), Err(EvalError::SqrtDomain(_))));
        assert!(matches!(at("1/x", 0.0), Err(EvalError::DivisionByZero)));
        assert!(matches!(at("x^0.5", -1.0), Err(EvalError::PowDomain { .. })));
        assert!(matches!(at("x^-2", 0.0), Err(EvalError::DivisionByZero)));
        assert!(at("x^3", -2.0).is_ok());
        assert_eq!(at("x^0", 0.0).unwrap().value, 1.0);
    }
}
