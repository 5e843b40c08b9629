//! Arithmetic expressions over decimal literals and named symbols.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := decimal | ident | '(' expr ')'
//! decimal := digit+ ('.' digit+)?
//! ident   := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Literals are kept as exact rationals. Printing reproduces the parse tree,
//! so `parse(print(e)) == e`.

use crate::rigor::{big_rational_interval, Interval};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    fn prec(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Div => 2,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Op::Add => " + ",
            Op::Sub => " - ",
            Op::Mul => "*",
            Op::Div => "/",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Nonnegative terminating decimal.
    Num(BigRational),
    Sym(String),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
}

/// c + s·b_GW with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub constant: BigRational,
    pub slope: BigRational,
}

impl Affine {
    pub fn constant(c: BigRational) -> Self {
        Affine { constant: c, slope: BigRational::zero() }
    }

    pub fn is_constant(&self) -> bool {
        self.slope.is_zero()
    }

    pub fn eval(&self, bgw: Interval) -> Interval {
        let c = big_rational_interval(&self.constant);
        if self.slope.is_zero() {
            c
        } else {
            c + big_rational_interval(&self.slope) * bgw
        }
    }

    fn add(&self, o: &Affine) -> Affine {
        Affine { constant: &self.constant + &o.constant, slope: &self.slope + &o.slope }
    }

    fn neg(&self) -> Affine {
        Affine { constant: -&self.constant, slope: -&self.slope }
    }

    fn scale(&self, k: &BigRational) -> Affine {
        Affine { constant: &self.constant * k, slope: &self.slope * k }
    }
}

impl Expr {
    pub fn sym(name: &str) -> Expr {
        Expr::Sym(name.to_string())
    }

    /// Exact decimal literal; fails for rationals without a terminating
    /// expansion.
    pub fn rational(r: &BigRational) -> Option<Expr> {
        if !is_terminating(r) {
            return None;
        }
        let lit = Expr::Num(r.abs());
        Some(if r.is_negative() { Expr::Neg(Box::new(lit)) } else { lit })
    }

    /// The shortest decimal that round-trips to `x`.
    pub fn decimal(x: f64) -> Expr {
        assert!(x.is_finite());
        let r = parse_decimal(&format!("{}", x.abs())).expect("float formatting is decimal");
        let lit = Expr::Num(r);
        if x < 0.0 {
            Expr::Neg(Box::new(lit))
        } else {
            lit
        }
    }

    pub fn bin(op: Op, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn parse(text: &str) -> Result<Expr, String> {
        let toks = tokenize(text)?;
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(format!("unexpected {:?}", p.toks[p.pos]));
        }
        Ok(e)
    }

    pub fn symbols(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => {
                if !out.contains(&s.as_str()) {
                    out.push(s)
                }
            }
            Expr::Neg(a) => a.collect(out),
            Expr::Bin(_, a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    /// The expression as an affine function of b_GW, when it is one.
    pub fn affine(&self, lookup: &dyn Fn(&str) -> Option<Affine>) -> Option<Affine> {
        Some(match self {
            Expr::Num(r) => Affine::constant(r.clone()),
            Expr::Sym(s) => lookup(s)?,
            Expr::Neg(a) => a.affine(lookup)?.neg(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.affine(lookup)?, b.affine(lookup)?);
                match op {
                    Op::Add => x.add(&y),
                    Op::Sub => x.add(&y.neg()),
                    Op::Mul if x.is_constant() => y.scale(&x.constant),
                    Op::Mul if y.is_constant() => x.scale(&y.constant),
                    Op::Div if y.is_constant() && !y.constant.is_zero() => {
                        x.scale(&y.constant.recip())
                    }
                    _ => return None,
                }
            }
        })
    }

    /// The exact value when the expression involves literals only.
    pub fn exact(&self) -> Option<BigRational> {
        let a = self.affine(&|_| None)?;
        Some(a.constant)
    }

    pub fn interval(&self, lookup: &dyn Fn(&str) -> Option<Interval>) -> Option<Interval> {
        Some(match self {
            Expr::Num(r) => big_rational_interval(r),
            Expr::Sym(s) => lookup(s)?,
            Expr::Neg(a) => -a.interval(lookup)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.interval(lookup)?, b.interval(lookup)?);
                match op {
                    Op::Add => x + y,
                    Op::Sub => x - y,
                    Op::Mul => x * y,
                    Op::Div => x / y,
                }
            }
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.prec(),
            _ => 3,
        }
    }
}

fn is_terminating(r: &BigRational) -> bool {
    let mut d = r.denom().clone();
    for p in [2u32, 5] {
        let p = BigInt::from(p);
        while d.is_multiple_of(&p) {
            d /= &p;
        }
    }
    d.is_one()
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() || !int.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if s.contains('.') && (frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit())) {
        return None;
    }
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(numer, denom))
}

fn format_decimal(r: &BigRational) -> String {
    debug_assert!(is_terminating(r) && !r.is_negative());
    let mut digits = 0usize;
    let mut scaled = r.clone();
    while !scaled.is_integer() {
        scaled *= BigRational::from_integer(BigInt::from(10));
        digits += 1;
    }
    let n = scaled.to_integer().to_string();
    if digits == 0 {
        return n;
    }
    let n = format!("{n:0>width$}", width = digits + 1);
    let (i, f) = n.split_at(n.len() - digits);
    format!("{i}.{f}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => f.write_str(&format_decimal(r)),
            Expr::Sym(s) => f.write_str(s),
            Expr::Neg(a) => {
                if a.prec() < 3 {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Expr::Bin(op, a, b) => {
                let p = op.prec();
                if a.prec() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str(op.symbol())?;
                if b.prec() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Punct(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            let lit = &s[start..i];
            out.push(Tok::Num(parse_decimal(lit).ok_or_else(|| format!("bad number {lit:?}"))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Ident(s[start..i].to_string()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_punct(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Tok::Punct(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut e = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_punct() {
            self.pos += 1;
            let op = if c == '+' { Op::Add } else { Op::Sub };
            e = Expr::bin(op, e, self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut e = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_punct() {
            self.pos += 1;
            let op = if c == '*' { Op::Mul } else { Op::Div };
            e = Expr::bin(op, e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, String> {
        if self.peek_punct() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, String> {
        let tok = self.toks.get(self.pos).cloned().ok_or("unexpected end of expression")?;
        self.pos += 1;
        match tok {
            Tok::Num(r) => Ok(Expr::Num(r)),
            Tok::Ident(s) => Ok(Expr::Sym(s)),
            Tok::Punct('(') => {
                let e = self.expr()?;
                if self.peek_punct() != Some(')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Punct(c) => Err(format!("unexpected {c:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_precedence_and_literals() {
        let e = Expr::parse("-2*b - nu2").unwrap();
        assert_eq!(e.to_string(), "-2*b - nu2");
        let lookup = |s: &str| match s {
            "b" => Some(Affine { constant: q(1, 1), slope: q(1, 1) }),
            "nu2" => Some(Affine::constant(q(13, 1000))),
            _ => None,
        };
        let a = e.affine(&lookup).unwrap();
        assert_eq!(a.constant, q(-2013, 1000));
        assert_eq!(a.slope, q(-2, 1));
        assert_eq!(Expr::parse("0.351359472465").unwrap().exact(), Some(q(351359472465, 1_000_000_000_000)));
        assert_eq!(Expr::parse("1 - (2 - 3)").unwrap().exact(), Some(q(2, 1)));
        assert_eq!(Expr::parse("8/2/2").unwrap().exact(), Some(q(2, 1)));
    }

    #[test]
    fn nonlinear_has_no_affine_form() {
        let lookup = |_: &str| Some(Affine { constant: q(0, 1), slope: q(1, 1) });
        assert!(Expr::parse("x*x").unwrap().affine(&lookup).is_none());
        assert!(Expr::parse("1/x").unwrap().affine(&lookup).is_none());
        assert!(Expr::parse("x/4").unwrap().affine(&lookup).is_some());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1 +", "(1", "1.", ".5", "2 $ 3", "1 2"] {
            assert!(Expr::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn decimal_from_float() {
        assert_eq!(Expr::decimal(1e-4).to_string(), "0.0001");
        assert_eq!(Expr::decimal(-0.25).to_string(), "-0.25");
        assert_eq!(Expr::rational(&q(1, 3)), None);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..5000, 0u32..4).prop_map(|(n, k)| Expr::Num(q(n as i64, 10i64.pow(k)))),
            prop::sample::select(vec!["b", "bgw", "nu1", "x_2"]).prop_map(Expr::sym),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (prop::sample::select(vec![Op::Add, Op::Sub, Op::Mul, Op::Div]), inner.clone(), inner)
                    .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(Expr::parse(&text).unwrap(), e);
        }
    }
}
