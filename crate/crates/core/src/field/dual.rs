use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Complex64, FieldError, FieldSpec, Rational, Scalar};

/// `re + eps * eps_part` with `eps^2 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<F> {
    pub re: F,
    pub eps: F,
}

impl<F: Scalar> Dual<F> {
    pub fn new(re: F, eps: F) -> Self {
        Dual { re, eps }
    }

    pub fn eps_unit() -> Self {
        Dual::new(F::zero(), F::one())
    }
}

/// `a + b*eps`; both components must come from the same base field.
pub fn dual_lift<F: Scalar>(a: F, b: F) -> Result<Dual<F>, FieldError> {
    if !a.same_field(&b) {
        return Err(FieldError::MixedFields);
    }
    Ok(Dual::new(a, b))
}

fn is_compound(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    body.contains('+') || body.contains('-')
}

fn wrap(s: String) -> String {
    if is_compound(&s) {
        format!("({})", s)
    } else {
        s
    }
}

impl<F: Scalar> fmt::Display for Dual<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eps.is_zero() {
            return write!(f, "{}", self.re);
        }
        let eps = self.eps.to_string();
        let eps_term = if eps == "1" {
            "eps".to_string()
        } else if eps == "-1" {
            "-eps".to_string()
        } else {
            format!("{}*eps", wrap(eps))
        };
        if self.re.is_zero() {
            return f.write_str(&eps_term);
        }
        let re = wrap(self.re.to_string());
        if let Some(rest) = eps_term.strip_prefix('-') {
            write!(f, "{}-{}", re, rest)
        } else {
            write!(f, "{}+{}", re, eps_term)
        }
    }
}

impl<F: Scalar> Zero for Dual<F> {
    fn zero() -> Self {
        Dual::new(F::zero(), F::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<F: Scalar> One for Dual<F> {
    fn one() -> Self {
        Dual::new(F::one(), F::zero())
    }
}

impl<F: Scalar> Add for Dual<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<F: Scalar> Sub for Dual<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<F: Scalar> Neg for Dual<F> {
    type Output = Self;

    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<F: Scalar> Mul for Dual<F> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let eps = self.re.clone() * rhs.eps + self.eps * rhs.re.clone();
        Dual::new(self.re * rhs.re, eps)
    }
}

impl<F: Scalar> Scalar for Dual<F> {
    /// Units are exactly the elements with invertible real part:
    /// `(a + b eps)^-1 = a^-1 - b a^-2 eps`.
    fn try_inv(&self) -> Option<Self> {
        let inv = self.re.try_inv()?;
        let eps = -(self.eps.clone() * inv.clone() * inv.clone());
        Some(Dual::new(inv, eps))
    }

    fn from_int(n: i64) -> Self {
        Dual::new(F::from_int(n), F::zero())
    }

    fn from_rational(q: &Rational) -> Self {
        Dual::new(F::from_rational(q), F::zero())
    }

    fn is_exact() -> bool {
        F::is_exact()
    }

    fn magnitude(&self) -> f64 {
        self.re.magnitude() + self.eps.magnitude()
    }

    fn to_c64(&self) -> Complex64 {
        self.re.to_c64()
    }

    fn resolve_symbol(name: &str, field: &FieldSpec) -> Option<Self> {
        if name == "eps" {
            return Some(Dual::eps_unit());
        }
        F::resolve_symbol(name, field).map(|x| Dual::new(x, F::zero()))
    }

    fn same_field(&self, other: &Self) -> bool {
        self.re.same_field(&other.re) && self.eps.same_field(&other.eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Rational;

    fn d(a: i64, b: i64) -> Dual<Q> {
        Dual::new(Q::from_int(a), Q::from_int(b))
    }

    #[test]
    fn identity_and_nilpotent() {
        assert!(d(1, 0).is_one());
        assert!((d(0, 1) * d(0, 1)).is_zero());
    }

    #[test]
    fn product_truncates() {
        // (2 + 3e)(1 - e) = 2 + (3 - 2)e
        assert_eq!(d(2, 3) * d(1, -1), d(2, 1));
    }

    #[test]
    fn inverse_iff_real_part_nonzero() {
        assert!(d(0, 5).try_inv().is_none());
        let x = d(3, 7);
        assert!((x.clone() * x.try_inv().unwrap()).is_one());
    }

    #[test]
    fn display_form() {
        assert_eq!(d(2, 3).to_string(), "2+3*eps");
        assert_eq!(d(2, -1).to_string(), "2-eps");
        assert_eq!(d(0, 1).to_string(), "eps");
        assert_eq!(d(4, 0).to_string(), "4");
    }
}
