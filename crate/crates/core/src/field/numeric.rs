use num_traits::{ToPrimitive, Zero};

use super::{Field, FieldSpec, Rational, Scalar};

pub type Complex64 = num_complex::Complex<f64>;

impl Scalar for Complex64 {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_rational(q: &Rational) -> Self {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn is_exact() -> bool {
        false
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn resolve_symbol(name: &str, field: &FieldSpec) -> Option<Self> {
        if name == "i" {
            return Some(Complex64::new(0.0, 1.0));
        }
        let ext = field.extension()?;
        ext.symbol_coeffs(name).map(|c| ext.eval_complex(&c))
    }
}

impl Field for Complex64 {}

impl Scalar for f64 {
    fn try_inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_rational(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }

    fn is_exact() -> bool {
        false
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl Field for f64 {}

/// All complex roots of the polynomial with coefficients `coeffs`
/// (constant term first), by Aberth–Ehrlich iteration.
///
/// Leading zeros are ignored. Returns an empty vector for constants.
pub fn complex_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    // Fujiwara-style radius bound for the initial circle
    let radius = (0..n)
        .map(|k| monic[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 2.0;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(radius * 0.5, theta)
        })
        .collect();

    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for a in monic.iter().rev() {
            dp = dp * x + p;
            p = p * x + a;
        }
        (p, dp)
    };

    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.is_zero() {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::zero();
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if !diff.is_zero() {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let step = if denom.is_zero() || !denom.is_finite() {
                ratio
            } else {
                ratio / denom
            };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_cyclotomic() {
        let c = [1.0, 1.0, 1.0].map(|x| Complex64::new(x, 0.0));
        let mut r = complex_roots(&c);
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[1] - Complex64::new(-0.5, 3f64.sqrt() / 2.0)).norm() < 1e-12);
        assert!((r[0] - Complex64::new(-0.5, -(3f64.sqrt()) / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_of_real_cubic() {
        // (x-1)(x+2)(x-3) = x^3 - 2x^2 - 5x + 6
        let c = [6.0, -5.0, -2.0, 1.0].map(|x| Complex64::new(x, 0.0));
        let mut r: Vec<f64> = complex_roots(&c).iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }
}
