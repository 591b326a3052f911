//! Text syntax for scalars and polynomials.
//!
//! Grammar: sums of products of powers, with `+ - * / ^`, parentheses,
//! integer/decimal/scientific literals (read exactly), and identifiers.
//! A literal directly followed by an identifier or `(` multiplies it, so
//! `3x^2` and `2(x+1)` are accepted. Identifiers are resolved by the caller:
//! `x` is the polynomial variable, `a` the extension generator, `eps` the
//! dual unit, `i` the imaginary unit in numeric mode, plus any named roots.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldSpec, Rational, Scalar};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at offset {pos} in {input:?}")]
    BadChar { ch: char, pos: usize, input: String },
    #[error("unexpected end of input in {0:?}")]
    UnexpectedEnd(String),
    #[error("unexpected token {token:?} in {input:?}")]
    UnexpectedToken { token: String, input: String },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("exponent must be a non-negative integer literal")]
    BadExponent,
    #[error("division by a non-invertible expression")]
    BadDivision,
    #[error("expected a constant, found {0:?}")]
    NotConstant(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rational),
    Sym(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

fn parse_number(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    let digits = format!("{}{}", int_part, frac_part);
    if digits.is_empty() {
        return None;
    }
    let n: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let mut q = Rational::from_integer(n);
    if scale >= 0 {
        q *= num_traits::pow(ten, scale as usize);
    } else {
        q /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(q)
}

fn tokenize(input: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // scientific suffix, only when followed by digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let q = parse_number(&text).ok_or(ParseError::BadChar {
                ch: c,
                pos: start,
                input: input.to_string(),
            })?;
            out.push(Token::Num(q));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(ParseError::BadChar {
                ch: c,
                pos: i,
                input: input.to_string(),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    input: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn unexpected(&self, t: Option<Token>) -> ParseError {
        match t {
            None => ParseError::UnexpectedEnd(self.input.to_string()),
            Some(t) => ParseError::UnexpectedToken {
                token: match t {
                    Token::Num(q) => q.to_string(),
                    Token::Ident(s) => s,
                    Token::Op(c) => c.to_string(),
                },
                input: self.input.to_string(),
            },
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = if c == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Token::Op(c @ ('*' | '/'))) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = if c == '*' {
                        Expr::Mul(Box::new(lhs), Box::new(rhs))
                    } else {
                        Expr::Div(Box::new(lhs), Box::new(rhs))
                    };
                }
                // implicit product: 3x, 2(x+1), (x+1)(x-1)
                Some(Token::Ident(_)) | Some(Token::Op('(')) => {
                    let rhs = self.power()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Token::Num(q)) if q.is_integer() && q >= Rational::zero() => {
                    let e: u32 = q
                        .to_integer()
                        .try_into()
                        .map_err(|_| ParseError::BadExponent)?;
                    Ok(Expr::Pow(Box::new(base), e))
                }
                _ => Err(ParseError::BadExponent),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Token::Num(q)) => Ok(Expr::Num(q)),
            Some(Token::Ident(s)) => Ok(Expr::Sym(s)),
            Some(Token::Op('(')) => {
                let e = self.sum()?;
                match self.next() {
                    Some(Token::Op(')')) => Ok(e),
                    t => Err(self.unexpected(t)),
                }
            }
            t => Err(self.unexpected(t)),
        }
    }
}

pub fn parse_expr(input: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(input)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        input,
    };
    let e = p.sum()?;
    if p.pos < p.tokens.len() {
        let t = p.next();
        return Err(p.unexpected(t));
    }
    Ok(e)
}

/// A commutative ring that parsed expressions can be evaluated into.
pub trait Algebra:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_rational(q: &Rational) -> Self;

    fn one() -> Self;

    /// `self / rhs`, defined at least when `rhs` is an invertible constant.
    fn try_div(&self, rhs: &Self) -> Option<Self>;
}

impl Expr {
    pub fn eval<A: Algebra>(
        &self,
        sym: &dyn Fn(&str) -> Option<A>,
    ) -> Result<A, ParseError> {
        Ok(match self {
            Expr::Num(q) => A::from_rational(q),
            Expr::Sym(s) => sym(s).ok_or_else(|| ParseError::UnknownSymbol(s.clone()))?,
            Expr::Neg(a) => -a.eval(sym)?,
            Expr::Add(a, b) => a.eval(sym)? + b.eval(sym)?,
            Expr::Sub(a, b) => a.eval(sym)? - b.eval(sym)?,
            Expr::Mul(a, b) => a.eval(sym)? * b.eval(sym)?,
            Expr::Div(a, b) => a
                .eval(sym)?
                .try_div(&b.eval(sym)?)
                .ok_or(ParseError::BadDivision)?,
            Expr::Pow(a, e) => {
                let base = a.eval(sym)?;
                let mut acc = A::one();
                for _ in 0..*e {
                    acc = acc * base.clone();
                }
                acc
            }
        })
    }
}

impl<F: Scalar> Algebra for Poly<F> {
    fn from_rational(q: &Rational) -> Self {
        Poly::constant(F::from_rational(q))
    }

    fn one() -> Self {
        Poly::one()
    }

    fn try_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_constant() {
            let inv = rhs.coeff(0).try_inv()?;
            Some(self.scale(&inv))
        } else {
            self.exact_div(rhs).ok()
        }
    }
}

/// Parses a univariate polynomial in `x` with coefficients resolved in `field`.
pub fn parse_poly<F: Scalar>(input: &str, field: &FieldSpec) -> Result<Poly<F>, ParseError> {
    let e = parse_expr(input)?;
    e.eval(&|s: &str| {
        if s == "x" {
            Some(Poly::x())
        } else {
            F::resolve_symbol(s, field).map(Poly::constant)
        }
    })
}

pub fn parse_scalar<F: Scalar>(input: &str, field: &FieldSpec) -> Result<F, ParseError> {
    let e = parse_expr(input)?;
    let p: Poly<F> = e.eval(&|s: &str| F::resolve_symbol(s, field).map(Poly::constant))?;
    if p.is_constant() {
        Ok(p.coeff(0))
    } else {
        Err(ParseError::NotConstant(input.to_string()))
    }
}

/// Parses a rational literal expression such as `-2/3` or `1.5e-2`.
pub fn parse_rational(input: &str) -> Result<Rational, ParseError> {
    parse_scalar::<Rational>(input, &FieldSpec::Rational)
}

impl Algebra for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn one() -> Self {
        <Rational as One>::one()
    }

    fn try_div(&self, rhs: &Self) -> Option<Self> {
        rhs.try_inv().map(|r| self * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_extension, Complex64, Dual, ExtElem};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("-2/3").unwrap(), q(-2, 3));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("1.5e-2").unwrap(), q(3, 200));
        assert_eq!(parse_rational("2^10").unwrap(), q(1024, 1));
        assert!(matches!(parse_rational("1/0"), Err(ParseError::BadDivision)));
    }

    #[test]
    fn polynomials_over_the_rationals() {
        let p: Poly<Rational> = parse_poly("x^3 - 1", &FieldSpec::Rational).unwrap();
        assert_eq!(p.to_string(), "x^3 - 1");
        let p: Poly<Rational> = parse_poly("1 + x^3/2", &FieldSpec::Rational).unwrap();
        assert_eq!(p.to_string(), "1/2*x^3 + 1");
        let p: Poly<Rational> = parse_poly("3x^2 - 2(x+1)", &FieldSpec::Rational).unwrap();
        assert_eq!(p.to_string(), "3*x^2 - 2*x - 2");
        let p: Poly<Rational> = parse_poly("(x-1)(x+1)", &FieldSpec::Rational).unwrap();
        assert_eq!(p.to_string(), "x^2 - 1");
        assert!(matches!(
            parse_poly::<Rational>("y + 1", &FieldSpec::Rational),
            Err(ParseError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn display_round_trip_over_extension() {
        let min: Poly<Rational> = parse_poly("x^2 + x + 1", &FieldSpec::Rational).unwrap();
        let ext = make_extension(&min, "a", &[], None).unwrap();
        let spec = FieldSpec::Extension(ext);
        let p: Poly<ExtElem> = parse_poly("(1+a)*x^2 - a*x + 1/2", &spec).unwrap();
        let again: Poly<ExtElem> = parse_poly(&p.to_string(), &spec).unwrap();
        assert_eq!(p, again);
        let w: ExtElem = parse_scalar("a^2", &spec).unwrap();
        assert_eq!(w.to_string(), "-1-a");
    }

    #[test]
    fn dual_and_complex_symbols() {
        let d: Dual<Rational> = parse_scalar("2 + 3eps", &FieldSpec::Rational).unwrap();
        assert_eq!(d, Dual::new(q(2, 1), q(3, 1)));
        let z: Complex64 = parse_scalar("1 - 2i", &FieldSpec::Rational).unwrap();
        assert_eq!(z, Complex64::new(1.0, -2.0));
    }
}
