use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field::{Rational, Scalar};
use crate::poly::{is_compound, Poly};
use crate::text::Algebra;

/// Exponent vector of a monomial.
pub type Monomial = Vec<u32>;

/// Sparse polynomial in a fixed number of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<F> {
    nvars: usize,
    terms: BTreeMap<Monomial, F>,
}

impl<F: Scalar> MultiPoly<F> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: F) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, F::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, F)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "monomial arity");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Monomial, c: F) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> F {
        self.terms.get(e).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, F::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[F]) -> F {
        self.terms.iter().fold(F::zero(), |s, (e, c)| {
            let m = e.iter().zip(point).fold(c.clone(), |m, (&k, x)| {
                (0..k).fold(m, |m, _| m * x.clone())
            });
            s + m
        })
    }

    /// `p(x + point)`: coefficients of the expansion in powers of
    /// `x - point`.
    pub fn translate(&self, point: &[F]) -> Self {
        let shifted: Vec<Self> = (0..self.nvars)
            .map(|i| &Self::var(self.nvars, i) + &Self::constant(self.nvars, point[i].clone()))
            .collect();
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut m = Self::constant(self.nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = &m * &shifted[i].pow(k);
                }
            }
            out = &out + &m;
        }
        out
    }

    /// Substitutes the multivariate `x` into a univariate polynomial.
    pub fn compose(p: &Poly<F>, x: &Self) -> Self {
        p.coeffs()
            .iter()
            .rev()
            .fold(Self::zero(x.nvars), |acc, c| {
                &(&acc * x) + &Self::constant(x.nvars, c.clone())
            })
    }

    /// Partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, c.clone() * F::from_int(e[i] as i64))
            }),
        )
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> MultiPoly<G> {
        MultiPoly::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }
}

fn common_arity<F: Scalar>(a: &MultiPoly<F>, b: &MultiPoly<F>) -> (MultiPoly<F>, MultiPoly<F>) {
    let n = a.nvars.max(b.nvars);
    (a.with_arity(n), b.with_arity(n))
}

impl<F: Scalar> Add for &MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn add(self, rhs: &MultiPoly<F>) -> MultiPoly<F> {
        let (mut out, rhs) = common_arity(self, rhs);
        for (e, c) in rhs.terms {
            out.add_term(e, c);
        }
        out
    }
}

impl<F: Scalar> Sub for &MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn sub(self, rhs: &MultiPoly<F>) -> MultiPoly<F> {
        let (mut out, rhs) = common_arity(self, rhs);
        for (e, c) in rhs.terms {
            out.add_term(e, -c);
        }
        out
    }
}

impl<F: Scalar> Mul for &MultiPoly<F> {
    type Output = MultiPoly<F>;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &MultiPoly<F>) -> MultiPoly<F> {
        let (a, b) = common_arity(self, rhs);
        let mut out = MultiPoly::zero(a.nvars);
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<F: Scalar> Neg for &MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn neg(self) -> MultiPoly<F> {
        self.scale(&-F::one())
    }
}

macro_rules! owned_op {
    ($tr:ident, $m:ident) => {
        impl<F: Scalar> $tr for MultiPoly<F> {
            type Output = MultiPoly<F>;
            fn $m(self, rhs: MultiPoly<F>) -> MultiPoly<F> {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_op!(Add, add);
owned_op!(Sub, sub);
owned_op!(Mul, mul);

impl<F: Scalar> Neg for MultiPoly<F> {
    type Output = MultiPoly<F>;
    fn neg(self) -> MultiPoly<F> {
        -&self
    }
}

/// Constants parsed from text carry no variables yet; arity is fixed by
/// the first non-constant operand.
impl<F: Scalar> Algebra for MultiPoly<F> {
    fn from_rational(q: &Rational) -> Self {
        MultiPoly::constant(0, F::from_rational(q))
    }

    fn one() -> Self {
        MultiPoly::constant(0, F::one())
    }

    fn try_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.terms.len() != 1 {
            return None;
        }
        let (e, c) = rhs.terms.iter().next()?;
        if e.iter().any(|&k| k > 0) {
            return None;
        }
        Some(self.scale(&c.try_inv()?))
    }
}

impl<F: Scalar> MultiPoly<F> {
    /// Re-embeds into `nvars` variables (constants from the parser have arity 0).
    pub fn with_arity(&self, nvars: usize) -> Self {
        if nvars == self.nvars {
            return self.clone();
        }
        MultiPoly::from_terms(
            nvars,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = vec![0; nvars];
                e2[..e.len()].copy_from_slice(e);
                (e2, c.clone())
            }),
        )
    }

    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (e, c) in self.terms.iter().rev() {
            let mono: Vec<String> = e
                .iter()
                .zip(names)
                .filter(|(k, _)| **k > 0)
                .map(|(k, n)| if *k == 1 { n.clone() } else { format!("{}^{}", n, k) })
                .collect();
            let cs = c.to_string();
            let (neg, cs) = match cs.strip_prefix('-') {
                Some(rest) if !is_compound(&cs) => (true, rest.to_string()),
                _ if is_compound(&cs) => (false, format!("({})", cs)),
                _ => (false, cs),
            };
            let term = if mono.is_empty() {
                cs
            } else if cs == "1" {
                mono.join("*")
            } else {
                format!("{}*{}", cs, mono.join("*"))
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        out
    }
}

impl<F: Scalar> fmt::Display for MultiPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{}", i)).collect();
        write!(f, "{}", self.to_string_with(&names))
    }
}
