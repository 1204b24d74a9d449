//! Scalar expressions: parser, printer and generic evaluator.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`, and it is
//! right-associative (`2^3^2` is `2^(3^2)`). Identifiers resolve to a
//! variable, then a constant (`pi`, `e`), then a bound parameter.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::Point2;
use crate::jet::Scalar;

/// Named numeric parameters available to the parser.
pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Atan,
    Asinh,
    Acosh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 13] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Atan,
        Func::Asinh,
        Func::Acosh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Atan => "atan",
            Func::Asinh => "asinh",
            Func::Acosh => "acosh",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply<S: Scalar>(self, a: S) -> S {
        let v = a.value();
        match self {
            Func::Sin => a.chain(v.sin(), v.cos(), -v.sin()),
            Func::Cos => a.chain(v.cos(), -v.sin(), -v.cos()),
            Func::Tan => {
                let t = v.tan();
                let d1 = 1.0 + t * t;
                a.chain(t, d1, 2.0 * t * d1)
            }
            Func::Exp => {
                let e = v.exp();
                a.chain(e, e, e)
            }
            Func::Log => {
                if v <= 0.0 {
                    a.chain(f64::NAN, f64::NAN, f64::NAN)
                } else {
                    a.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
                }
            }
            Func::Sqrt => {
                let s = v.sqrt();
                a.chain(s, 0.5 / s, -0.25 / (s * v))
            }
            Func::Sinh => a.chain(v.sinh(), v.cosh(), v.sinh()),
            Func::Cosh => a.chain(v.cosh(), v.sinh(), v.cosh()),
            Func::Tanh => {
                let t = v.tanh();
                let d1 = 1.0 - t * t;
                a.chain(t, d1, -2.0 * t * d1)
            }
            Func::Atan => {
                let q = 1.0 + v * v;
                a.chain(v.atan(), 1.0 / q, -2.0 * v / (q * q))
            }
            Func::Asinh => {
                let q = 1.0 + v * v;
                a.chain(v.asinh(), 1.0 / q.sqrt(), -v / (q * q.sqrt()))
            }
            Func::Acosh => {
                let q = v * v - 1.0;
                a.chain(v.acosh(), 1.0 / q.sqrt(), -v / (q * q.sqrt()))
            }
            Func::Abs => {
                if v == 0.0 {
                    a.chain(0.0, f64::NAN, f64::NAN)
                } else {
                    a.chain(v.abs(), v.signum(), 0.0)
                }
            }
        }
    }
}

/// Abstract syntax tree. Variables are positional (`Var(0)` is the first
/// declared variable); names live on the owning [`Expression`].
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Const(Constant),
    Param { name: String, value: f64 },
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Atan2(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// True when no variable occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Param { .. } => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Binary(_, a, b) | Expr::Atan2(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Num(_) | Expr::Const(_) | Expr::Param { .. } => None,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Binary(_, a, b) | Expr::Atan2(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Evaluate with `vars[i]` bound to `Var(i)`. Any non-finite
    /// intermediate is reported as a fault naming the offending operation.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> std::result::Result<S, String> {
        let out = match self {
            Expr::Num(v) => S::constant(*v),
            Expr::Var(i) => *vars.get(*i).ok_or_else(|| format!("variable #{i} is not bound"))?,
            Expr::Const(c) => S::constant(c.value()),
            Expr::Param { value, .. } => S::constant(*value),
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Binary(op, a, b) => {
                let l = a.eval(vars)?;
                match op {
                    BinOp::Add => l + b.eval(vars)?,
                    BinOp::Sub => l - b.eval(vars)?,
                    BinOp::Mul => l * b.eval(vars)?,
                    BinOp::Div => {
                        let r = b.eval(vars)?;
                        if r.value() == 0.0 {
                            return Err("division by zero".into());
                        }
                        l / r
                    }
                    BinOp::Pow => pow(l, b, vars)?,
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(vars)?),
            Expr::Atan2(a, b) => atan2(a.eval(vars)?, b.eval(vars)?)?,
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(format!("`{}` is not finite here", OpName(self)))
        }
    }
}

fn pow<S: Scalar>(base: S, exponent: &Expr, vars: &[S]) -> std::result::Result<S, String> {
    if exponent.is_constant() {
        let n: f64 = exponent.eval::<f64>(&[])?;
        if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
            if n < 0.0 && base.value() == 0.0 {
                return Err("zero raised to a negative power".into());
            }
            return Ok(base.powi(n as i64));
        }
        let b = base.value();
        if b <= 0.0 {
            return Err("non-integer power of a non-positive base".into());
        }
        let p = b.powf(n);
        return Ok(base.chain(p, n * p / b, n * (n - 1.0) * p / (b * b)));
    }
    if base.value() <= 0.0 {
        return Err("variable power of a non-positive base".into());
    }
    let e = exponent.eval(vars)?;
    Ok(Func::Exp.apply(e * Func::Log.apply(base)))
}

fn atan2<S: Scalar>(y: S, x: S) -> std::result::Result<S, String> {
    let (yv, xv) = (y.value(), x.value());
    if yv == 0.0 && xv == 0.0 {
        return Err("atan2(0, 0) is undefined".into());
    }
    // Same local derivatives as atan2; pick the well-conditioned quotient.
    let local = if xv.abs() >= yv.abs() { Func::Atan.apply(y / x) } else { -Func::Atan.apply(x / y) };
    Ok(local.with_value(yv.atan2(xv)))
}

struct OpName<'a>(&'a Expr);

impl fmt::Display for OpName<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "var#{i}"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Param { name, .. } => f.write_str(name),
            Expr::Neg(_) => f.write_str("negation"),
            Expr::Binary(op, ..) => f.write_str(match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            }),
            Expr::Call(func, _) => f.write_str(func.name()),
            Expr::Atan2(..) => f.write_str("atan2"),
        }
    }
}

/// A parsed expression together with its variable names.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    tree: Expr,
    vars: Vec<String>,
}

impl Expression {
    pub fn new(tree: Expr, vars: &[&str]) -> Result<Self> {
        if let Some(i) = tree.max_var() {
            if i >= vars.len() {
                return Err(Error::InvalidInput(format!(
                    "expression uses variable #{i} but only {} names were given",
                    vars.len()
                )));
            }
        }
        Ok(Self { tree, vars: vars.iter().map(|s| s.to_string()).collect() })
    }

    pub fn tree(&self) -> &Expr {
        &self.tree
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Parameters referenced by the expression, with their bound values.
    pub fn params(&self) -> Params {
        fn walk(e: &Expr, out: &mut Params) {
            match e {
                Expr::Param { name, value } => {
                    out.insert(name.clone(), *value);
                }
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Binary(_, a, b) | Expr::Atan2(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                _ => {}
            }
        }
        let mut out = Params::new();
        walk(&self.tree, &mut out);
        out
    }

    /// Evaluate at `vars`; faults are reported against the first two
    /// coordinates.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S> {
        if vars.len() < self.vars.len() {
            return Err(Error::InvalidInput(format!("expected {} variables, got {}", self.vars.len(), vars.len())));
        }
        self.tree.eval(vars).map_err(|reason| Error::NonDifferentiablePoint {
            point: Point2::new(vars.first().map_or(f64::NAN, |v| v.value()), vars.get(1).map_or(0.0, |v| v.value())),
            reason,
        })
    }

    pub fn value_at(&self, vars: &[f64]) -> Result<f64> {
        self.eval(vars)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.tree, &self.vars)
    }
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Expr::Neg(_) => PREC_NEG,
        Expr::Binary(BinOp::Pow, ..) => PREC_POW,
        // Negative literals only arise from programmatic trees; print them
        // as a parenthesised negation.
        Expr::Num(v) if v.is_sign_negative() => PREC_NEG,
        _ => PREC_ATOM,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, vars: &[String], paren: bool) -> fmt::Result {
    if paren {
        f.write_str("(")?;
        write_expr(f, e, vars)?;
        f.write_str(")")
    } else {
        write_expr(f, e, vars)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, vars: &[String]) -> fmt::Result {
    match e {
        Expr::Num(v) if v.is_sign_negative() => write!(f, "-{}", -v),
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Var(i) => match vars.get(*i) {
            Some(name) => f.write_str(name),
            None => write!(f, "var{i}"),
        },
        Expr::Const(Constant::Pi) => f.write_str("pi"),
        Expr::Const(Constant::E) => f.write_str("e"),
        Expr::Param { name, .. } => f.write_str(name),
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_child(f, a, vars, precedence(a) < PREC_NEG)
        }
        Expr::Binary(BinOp::Pow, a, b) => {
            write_child(f, a, vars, precedence(a) <= PREC_POW)?;
            f.write_str("^")?;
            write_child(f, b, vars, precedence(b) < PREC_NEG)
        }
        Expr::Binary(op, a, b) => {
            let (p, sym) = match op {
                BinOp::Add => (PREC_ADD, " + "),
                BinOp::Sub => (PREC_ADD, " - "),
                BinOp::Mul => (PREC_MUL, " * "),
                BinOp::Div => (PREC_MUL, " / "),
                BinOp::Pow => unreachable!(),
            };
            write_child(f, a, vars, precedence(a) < p)?;
            f.write_str(sym)?;
            write_child(f, b, vars, precedence(b) <= p)
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, vars)?;
            f.write_str(")")
        }
        Expr::Atan2(a, b) => {
            f.write_str("atan2(")?;
            write_expr(f, a, vars)?;
            f.write_str(", ")?;
            write_expr(f, b, vars)?;
            f.write_str(")")
        }
    }
}

/// Parse an expression in the variables `x` and `y`.
pub fn parse(text: &str, params: &Params) -> Result<Expression> {
    parse_with_vars(text, &["x", "y"], params)
}

/// Parse an expression over an explicit list of variable names.
pub fn parse_with_vars(text: &str, vars: &[&str], params: &Params) -> Result<Expression> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, vars, params, len: text.len() };
    let tree = p.expr()?;
    if let Some(tok) = p.tokens.get(p.pos) {
        return Err(syntax(tok.offset, format!("unexpected {}", tok.kind.describe())));
    }
    Expression::new(tree, vars)
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax { offset, message: message.into() }
}

#[derive(Clone, Debug, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => format!("number {v}"),
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Sym(c) => format!("`{c}`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| syntax(start, format!("malformed number `{lit}`")))?;
            if !v.is_finite() {
                return Err(syntax(start, format!("number `{lit}` is out of range")));
            }
            out.push(Token { kind: TokKind::Num(v), offset: start });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { kind: TokKind::Ident(text[start..i].to_string()), offset: start });
        } else if b"+-*/^(),".contains(&c) {
            out.push(Token { kind: TokKind::Sym(c as char), offset: i });
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(syntax(i, format!("unexpected character `{ch}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
    params: &'a Params,
    len: usize,
}

impl Parser<'_> {
    fn peek_sym(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token { kind: TokKind::Sym(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.offset)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.tokens.get(self.pos).map_or("end of input".to_string(), |t| t.kind.describe());
            Err(syntax(self.offset(), format!("expected `{c}`, found {found}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(if c == '+' { BinOp::Add } else { BinOp::Sub }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(if c == '*' { BinOp::Mul } else { BinOp::Div }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_sym() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek_sym() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let offset = self.offset();
        let Some(tok) = self.tokens.get(self.pos).cloned() else {
            return Err(syntax(offset, "unexpected end of input"));
        };
        self.pos += 1;
        match tok.kind {
            TokKind::Num(v) => Ok(Expr::Num(v)),
            TokKind::Sym('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            TokKind::Sym(c) => Err(syntax(offset, format!("unexpected `{c}`"))),
            TokKind::Ident(name) => {
                if self.peek_sym() == Some('(') {
                    self.pos += 1;
                    return self.call(&name, offset);
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(Constant::Pi)),
                    "e" => return Ok(Expr::Const(Constant::E)),
                    _ => {}
                }
                match self.params.get(&name) {
                    Some(&value) => Ok(Expr::Param { name, value }),
                    None => Err(Error::UnboundParameter(name)),
                }
            }
        }
    }

    fn call(&mut self, name: &str, offset: usize) -> Result<Expr> {
        let mut args = vec![self.expr()?];
        while self.peek_sym() == Some(',') {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect(')')?;
        if name == "atan2" {
            let [a, b]: [Expr; 2] = args.try_into().map_err(|_| syntax(offset, "atan2 takes exactly two arguments"))?;
            return Ok(Expr::Atan2(Box::new(a), Box::new(b)));
        }
        let func = Func::from_name(name).ok_or_else(|| syntax(offset, format!("unknown function `{name}`")))?;
        if args.len() != 1 {
            return Err(syntax(offset, format!("{name} takes exactly one argument")));
        }
        Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet2;

    fn p(text: &str) -> Expression {
        parse(text, &Params::new()).unwrap()
    }

    #[test]
    fn addition_of_power() {
        let e = p("y + x^2");
        assert_eq!(
            *e.tree(),
            Expr::binary(BinOp::Add, Expr::Var(1), Expr::binary(BinOp::Pow, Expr::Var(0), Expr::Num(2.0)))
        );
    }

    #[test]
    fn unbound_parameter_is_named() {
        assert_eq!(parse("y + g", &Params::new()), Err(Error::UnboundParameter("g".into())));
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let e = p("-x^2");
        assert_eq!(*e.tree(), Expr::Neg(Box::new(Expr::binary(BinOp::Pow, Expr::Var(0), Expr::Num(2.0)))));
        assert_eq!(e.value_at(&[3.0, 0.0]).unwrap(), -9.0);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(p("2^3^2").value_at(&[0.0, 0.0]).unwrap(), 512.0);
        assert_eq!(p("2^-1").value_at(&[0.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn left_associative_arithmetic() {
        assert_eq!(p("8 - 3 - 2").value_at(&[0.0, 0.0]).unwrap(), 3.0);
        assert_eq!(p("8 / 4 / 2").value_at(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(p("1 + 2 * 3").value_at(&[0.0, 0.0]).unwrap(), 7.0);
    }

    #[test]
    fn scientific_literals_and_constant_e() {
        assert_eq!(p("2e-3").value_at(&[0.0, 0.0]).unwrap(), 0.002);
        assert_eq!(p("2*e").value_at(&[0.0, 0.0]).unwrap(), 2.0 * std::f64::consts::E);
        assert_eq!(p("1.5E2").value_at(&[0.0, 0.0]).unwrap(), 150.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("x + * y", &Params::new()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse("sin(x", &Params::new()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("foo(x)", &Params::new()), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse("x $ y", &Params::new()), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("atan2(x)", &Params::new()), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1e999", &Params::new()), Err(Error::Syntax { .. })));
    }

    #[test]
    fn parameters_resolve() {
        let mut params = Params::new();
        params.insert("a".into(), 2.0);
        let e = parse("a * x", &params).unwrap();
        assert_eq!(e.value_at(&[3.0, 0.0]).unwrap(), 6.0);
        assert_eq!(e.to_string(), "a * x");
        assert_eq!(e.params(), params);
    }

    #[test]
    fn sqrt_at_zero_is_not_differentiable() {
        let e = p("sqrt(x)");
        assert_eq!(e.value_at(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(e.eval(&[Jet2::var_x(0.0), Jet2::var_y(0.0)]), Err(Error::NonDifferentiablePoint { .. })));
    }

    #[test]
    fn non_integer_power_needs_positive_base() {
        let e = p("x^0.5");
        assert!(e.value_at(&[-1.0, 0.0]).is_err());
        assert!(e.value_at(&[0.0, 0.0]).is_err());
        assert!((e.value_at(&[4.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        // Integer powers accept any base.
        assert_eq!(p("x^3").value_at(&[-2.0, 0.0]).unwrap(), -8.0);
    }

    #[test]
    fn abs_and_atan2_singularities() {
        let abs = p("abs(x)");
        assert_eq!(abs.value_at(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(abs.eval(&[Jet2::var_x(0.0), Jet2::var_y(1.0)]).is_err());
        assert!(p("atan2(y, x)").value_at(&[0.0, 0.0]).is_err());
        assert!(p("log(x)").value_at(&[-1.0, 0.0]).is_err());
        assert!(p("1 / x").value_at(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn atan2_covers_all_quadrants() {
        let e = p("atan2(y, x)");
        for &(x, y) in &[(1.0, 0.5), (-1.0, 0.5), (-1.0, -0.5), (0.2, -3.0), (0.0, 1.0), (-0.0, -2.0)] {
            let j: Jet2 = e.eval(&[Jet2::var_x(x), Jet2::var_y(y)]).unwrap();
            let r2 = x * x + y * y;
            assert!((j.value - f64::atan2(y, x)).abs() < 1e-15);
            assert!((j.gx + y / r2).abs() < 1e-14);
            assert!((j.gy - x / r2).abs() < 1e-14);
            assert!((j.hxx - 2.0 * x * y / (r2 * r2)).abs() < 1e-13);
        }
    }

    #[test]
    fn printer_reparses_to_the_same_tree() {
        for text in [
            "-x^2",
            "(-x)^2",
            "x - (y - 1)",
            "(x - y) - 1",
            "2^3^2",
            "(2^3)^2",
            "2^-x",
            "-(x + y) * 3",
            "a / (b * c)",
            "atan2(y, x - 1)",
            "--x",
        ] {
            let mut params = Params::new();
            params.extend([("a".to_string(), 1.0), ("b".to_string(), 2.0), ("c".to_string(), 3.0)]);
            let once = parse(text, &params).unwrap();
            let twice = parse(&once.to_string(), &params).unwrap();
            assert_eq!(once, twice, "{text} -> {once}");
        }
    }

    #[test]
    fn custom_variable_names() {
        let e = parse_with_vars("u + cos(v)", &["u", "v"], &Params::new()).unwrap();
        assert_eq!(e.to_string(), "u + cos(v)");
        assert_eq!(e.value_at(&[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(parse_with_vars("x", &["u", "v"], &Params::new()), Err(Error::UnboundParameter("x".into())));
    }
}
