//! Dense univariate polynomials.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("leading coefficient of the divisor is not invertible")]
    NotMonic,
    #[error("polynomial is zero")]
    ZeroPolynomial,
    #[error("gcd of two zero polynomials")]
    ZeroInputs,
    #[error("division is not exact")]
    NotDivisible,
}

/// Coefficient `i` multiplies `x^i`. Never stores trailing zeros.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<F> {
    coeffs: Vec<F>,
}

/// Output of [`Poly::gcd_monic`]: `c*f + d*g = gcd`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcdResult<F> {
    pub gcd: Poly<F>,
    pub c: Poly<F>,
    pub d: Poly<F>,
}

impl<F: Scalar> Poly<F> {
    pub fn new(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(F::one())
    }

    pub fn constant(c: F) -> Self {
        Poly::new(vec![c])
    }

    pub fn x() -> Self {
        Poly::monomial(F::one(), 1)
    }

    pub fn monomial(c: F, k: usize) -> Self {
        let mut v = vec![F::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// `x - z`.
    pub fn linear(z: F) -> Self {
        Poly::new(vec![-z, F::one()])
    }

    /// `prod (x - r)` over the given roots.
    pub fn from_roots(roots: &[F]) -> Self {
        roots
            .iter()
            .fold(Poly::one(), |acc, r| &acc * &Poly::linear(r.clone()))
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero past the end).
    pub fn coeff(&self, k: usize) -> F {
        self.coeffs.get(k).cloned().unwrap_or_else(F::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> F {
        self.coeffs.last().cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        !self.is_zero() && self.leading().is_one()
    }

    pub fn eval(&self, x: &F) -> F {
        let mut acc = F::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Poly<G> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn scale(&self, c: &F) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * F::from_int(k as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative with zero constant term.
    ///
    /// Panics if some `k + 1` up to the degree is not invertible in `F`.
    pub fn antiderivative(&self) -> Self {
        let mut v = Vec::with_capacity(self.coeffs.len() + 1);
        v.push(F::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            let inv = F::from_int(k as i64 + 1)
                .try_inv()
                .expect("integer not invertible in coefficient ring");
            v.push(c.clone() * inv);
        }
        Poly::new(v)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Poly::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// `g(x) = f(x + z)`.
    pub fn shift(&self, z: &F) -> Self {
        // Horner in the ring of polynomials: f(x+z) = (...(c_n (x+z) + c_{n-1})(x+z) + ...)
        let xz = Poly::new(vec![z.clone(), F::one()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &xz) + &Poly::constant(c.clone());
        }
        acc
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let inv = self.leading().try_inv().ok_or(PolyError::NotMonic)?;
        Ok(self.scale(&inv))
    }

    /// Long division `self = d*q + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Poly<F>) -> Result<(Self, Self), PolyError> {
        if d.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let inv = d.leading().try_inv().ok_or(PolyError::NotMonic)?;
        let dd = d.deg();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut q = vec![F::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = r[k + dd].clone() * inv.clone();
            if t.is_zero() {
                continue;
            }
            for (j, c) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].clone() - t.clone() * c.clone();
            }
            q[k] = t;
        }
        r.truncate(dd);
        Ok((Poly::new(q), Poly::new(r)))
    }

    pub fn exact_div(&self, d: &Poly<F>) -> Result<Self, PolyError> {
        let (q, r) = self.div_rem(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(PolyError::NotDivisible)
        }
    }

    pub fn divides(&self, f: &Poly<F>) -> bool {
        matches!(f.div_rem(self), Ok((_, r)) if r.is_zero())
    }

    /// Largest `m` with `(x - z)^m | self`.
    pub fn ord_at(&self, z: &F) -> Result<usize, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let lin = Poly::linear(z.clone());
        let mut f = self.clone();
        let mut m = 0;
        loop {
            let (q, r) = f.div_rem(&lin)?;
            if !r.is_zero() {
                return Ok(m);
            }
            f = q;
            m += 1;
        }
    }
}

impl<F: Field> Poly<F> {
    /// Extended Euclid: returns `(g, s, t)` with `s*self + t*other = g`,
    /// `g` monic (or zero when both inputs vanish).
    pub fn gcd_ext(&self, other: &Poly<F>) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1).expect("field division");
            let s = &s0 - &(&q * &s1);
            let t = &t0 - &(&q * &t1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.leading().inv();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn gcd_monic(&self, other: &Poly<F>) -> Result<GcdResult<F>, PolyError> {
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::ZeroInputs);
        }
        let (gcd, c, d) = self.gcd_ext(other);
        Ok(GcdResult { gcd, c, d })
    }

    pub fn gcd(&self, other: &Poly<F>) -> Self {
        self.gcd_ext(other).0
    }

    pub fn is_coprime(&self, other: &Poly<F>) -> bool {
        self.gcd(other).is_one()
    }

    /// `gcd(f, f') = 1`. Constants count as square-free.
    pub fn is_square_free(&self) -> bool {
        !self.is_zero() && (self.is_constant() || self.is_coprime(&self.derivative()))
    }
}

/// Determinant of the matrix whose row `r` holds the `r`-th derivatives.
///
/// Expanded by Laplace over column subsets, so no division is needed and the
/// result is exact over any commutative ring. The empty list gives `1`.
pub fn wronskian<F: Scalar>(polys: &[Poly<F>]) -> Poly<F> {
    let k = polys.len();
    if k == 0 {
        return Poly::one();
    }
    assert!(k < 20, "wronskian of too many polynomials");
    // derivs[r][c] = c-th polynomial differentiated r times
    let mut derivs: Vec<Vec<Poly<F>>> = vec![polys.to_vec()];
    for r in 1..k {
        let next = derivs[r - 1].iter().map(|p| p.derivative()).collect();
        derivs.push(next);
    }
    let mut dp: Vec<Option<Poly<F>>> = vec![None; 1 << k];
    dp[0] = Some(Poly::one());
    for mask in 0usize..(1 << k) {
        let Some(acc) = dp[mask].take() else { continue };
        let row = mask.count_ones() as usize;
        if row == k {
            dp[mask] = Some(acc);
            continue;
        }
        for c in 0..k {
            if mask & (1 << c) != 0 {
                continue;
            }
            let entry = &derivs[row][c];
            if entry.is_zero() {
                continue;
            }
            let above = (mask >> (c + 1)).count_ones();
            let mut term = &acc * entry;
            if above % 2 == 1 {
                term = -term;
            }
            let slot = &mut dp[mask | (1 << c)];
            *slot = Some(match slot.take() {
                Some(p) => &p + &term,
                None => term,
            });
        }
    }
    dp[(1 << k) - 1].take().unwrap_or_else(Poly::zero)
}

impl<F: Scalar> Zero for Poly<F> {
    fn zero() -> Self {
        Poly::zero()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<F: Scalar> One for Poly<F> {
    fn one() -> Self {
        Poly::one()
    }
}

impl<F: Scalar> Add<&Poly<F>> for &Poly<F> {
    type Output = Poly<F>;

    fn add(self, rhs: &Poly<F>) -> Poly<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<F: Scalar> Sub<&Poly<F>> for &Poly<F> {
    type Output = Poly<F>;

    fn sub(self, rhs: &Poly<F>) -> Poly<F> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<F: Scalar> Mul<&Poly<F>> for &Poly<F> {
    type Output = Poly<F>;

    fn mul(self, rhs: &Poly<F>) -> Poly<F> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![F::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(v)
    }
}

impl<F: Scalar> Neg for &Poly<F> {
    type Output = Poly<F>;

    fn neg(self) -> Poly<F> {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<F: Scalar> $tr for Poly<F> {
            type Output = Poly<F>;

            fn $m(self, rhs: Poly<F>) -> Poly<F> {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<F: Scalar> Neg for Poly<F> {
    type Output = Poly<F>;

    fn neg(self) -> Poly<F> {
        -&self
    }
}

/// True when a rendered scalar needs parentheses as a factor.
pub(crate) fn is_compound(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    body.contains(['+', '-', ' '])
}

impl<F: Scalar> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) if !is_compound(&s) => (true, rest.to_string()),
                _ => (false, s),
            };
            let body = if is_compound(&body) {
                format!("({})", body)
            } else {
                body
            };
            let mono = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{}", k),
            };
            let term = if k == 0 {
                body
            } else if body == "1" {
                mono
            } else {
                format!("{}*{}", body, mono)
            };
            if first {
                if neg {
                    f.write_str("-")?;
                }
                f.write_str(&term)?;
                first = false;
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
                f.write_str(&term)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_extension, ExtElem, Rational};
    use proptest::prelude::*;

    type Q = Rational;

    fn q(v: &[i64]) -> Poly<Q> {
        Poly::new(v.iter().map(|&c| Q::from_int(c)).collect())
    }

    fn half() -> Q {
        Q::new(1.into(), 2.into())
    }

    #[test]
    fn long_division_examples() {
        let (qt, r) = q(&[-1, 0, 0, 1]).div_rem(&q(&[0, 1])).unwrap();
        assert_eq!((qt, r), (q(&[0, 0, 1]), q(&[-1])));
        let (qt, r) = q(&[0, 0, 3]).div_rem(&q(&[0, 1])).unwrap();
        assert_eq!((qt, r), (q(&[0, 3]), Poly::zero()));
        let (qt, r) = q(&[0, 1]).div_rem(&q(&[0, 0, 1])).unwrap();
        assert_eq!((qt, r), (Poly::zero(), q(&[0, 1])));
    }

    #[test]
    fn gcd_examples() {
        let g = q(&[0, 1]).gcd_monic(&q(&[-1, 0, 0, 1])).unwrap();
        assert!(g.gcd.is_one());
        let lhs = &(&g.c * &q(&[0, 1])) + &(&g.d * &q(&[-1, 0, 0, 1]));
        assert!(lhs.is_one());
        assert_eq!(q(&[-1, 0, 1]).gcd(&q(&[-1, 1])), q(&[-1, 1]));
        assert_eq!(q(&[1, -2, 1]).gcd(&q(&[-1, 0, 1])), q(&[-1, 1]));
        assert_eq!(
            Poly::<Q>::zero().gcd_monic(&Poly::zero()),
            Err(PolyError::ZeroInputs)
        );
    }

    #[test]
    fn wronskian_examples() {
        let y2 = Poly::new(vec![Q::one(), Q::zero(), Q::zero(), half()]);
        assert_eq!(wronskian(&[q(&[0, 1]), y2]), q(&[-1, 0, 0, 1]));
        assert_eq!(wronskian(&[q(&[0, 1]), q(&[2, 0, 0, 1])]), q(&[-2, 0, 0, 2]));
        let f = q(&[3, -1, 4]);
        assert!(wronskian(&[f.clone(), f]).is_zero());
        assert_eq!(wronskian(&[q(&[1]), q(&[0, 1]), q(&[0, 0, 1])]), q(&[2]));
    }

    #[test]
    fn order_of_vanishing() {
        assert_eq!(q(&[2, -3, 0, 1]).ord_at(&Q::one()), Ok(2));
        assert_eq!(q(&[1]).ord_at(&Q::from_int(5)), Ok(0));
        assert_eq!(Poly::<Q>::zero().ord_at(&Q::one()), Err(PolyError::ZeroPolynomial));

        let ext = make_extension(&q(&[1, 1, 1]), "a", &[], None).unwrap();
        let w = ExtElem::generator(&ext);
        let f: Poly<ExtElem> = q(&[-1, 0, 0, 1]).map(|c| ExtElem::rational(c.clone()));
        assert_eq!(f.ord_at(&w), Ok(1));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(q(&[0, 0, 1]).shift(&Q::one()), q(&[1, 2, 1]));
        assert_eq!(q(&[2, 0, 0, 1]).shift(&Q::one()), q(&[3, 3, 3, 1]));
        assert_eq!(q(&[7]).shift(&Q::from_int(4)), q(&[7]));
    }

    #[test]
    fn display_form() {
        assert_eq!(q(&[-1, 0, 0, 1]).to_string(), "x^3 - 1");
        assert_eq!(q(&[2, -3, 0, 2]).to_string(), "2*x^3 - 3*x + 2");
        assert_eq!(q(&[0, -1]).to_string(), "-x");
        let h = Poly::new(vec![Q::one(), Q::zero(), Q::zero(), half()]);
        assert_eq!(h.to_string(), "1/2*x^3 + 1");
    }

    fn small_poly(max_deg: usize) -> impl Strategy<Value = Poly<Q>> {
        prop::collection::vec(-5i64..=5, 0..=max_deg + 1).prop_map(|v| q(&v))
    }

    proptest! {
        #[test]
        fn div_rem_round_trip(f in small_poly(6), d in small_poly(3)) {
            prop_assume!(!d.is_zero());
            let (qt, r) = f.div_rem(&d).unwrap();
            prop_assert_eq!(&(&d * &qt) + &r, f);
            prop_assert!(r.is_zero() || r.deg() < d.deg());
        }

        #[test]
        fn wronskian_is_antisymmetric(f in small_poly(4), g in small_poly(4)) {
            prop_assert_eq!(wronskian(&[f.clone(), g.clone()]), -wronskian(&[g, f]));
        }

        #[test]
        fn shift_agrees_with_evaluation(f in small_poly(5), z in -3i64..=3, t in -3i64..=3) {
            let (z, t) = (Q::from_int(z), Q::from_int(t));
            prop_assert_eq!(f.shift(&z).eval(&t), f.eval(&(z + t)));
        }

        #[test]
        fn antiderivative_inverts_derivative(f in small_poly(5)) {
            prop_assert_eq!(f.antiderivative().derivative(), f);
        }
    }
}
