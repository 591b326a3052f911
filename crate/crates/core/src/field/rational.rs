use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{Complex64, Field, Scalar};

pub type Rational = BigRational;

impl Scalar for BigRational {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn is_exact() -> bool {
        true
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl Field for BigRational {}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it lies within `rel_tol` (relative, floored at
/// absolute `rel_tol`) of `x`.
pub fn rational_from_f64(x: f64, max_den: u64, rel_tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let target = x;
    let mut v = x.abs();
    // convergents h/k of the continued fraction of |x|
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let tol = rel_tol * target.abs().max(1.0);
    let mut best: Option<Rational> = None;
    for _ in 0..64 {
        let a = v.floor();
        let ai = BigInt::from(a as i128);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2 > BigInt::from(max_den) {
            break;
        }
        let mut q = BigRational::new(h2.clone(), k2.clone());
        if target < 0.0 {
            q = -q;
        }
        let approx = q.to_f64().unwrap_or(f64::NAN);
        if (approx - target).abs() <= tol {
            best = Some(q);
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac <= f64::EPSILON {
            break;
        }
        v = 1.0 / frac;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn normalized_representation() {
        let x = q(4, -6);
        assert_eq!(x.numer(), &BigInt::from(-2));
        assert_eq!(x.denom(), &BigInt::from(3));
        assert_eq!(x.to_string(), "-2/3");
        assert_eq!(q(6, 3).to_string(), "2");
    }

    #[test]
    fn recovers_small_fractions() {
        assert_eq!(rational_from_f64(0.5, 1000, 1e-12), Some(q(1, 2)));
        assert_eq!(rational_from_f64(-2.0 / 3.0, 1000, 1e-12), Some(q(-2, 3)));
        assert_eq!(rational_from_f64(1e-13, 1000, 1e-9), Some(q(0, 1)));
        assert_eq!(rational_from_f64(1.0 / 3f64.sqrt(), 1000, 1e-12), None);
    }
}
