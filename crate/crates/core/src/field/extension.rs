use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::numeric::complex_roots;
use super::{Complex64, Field, FieldError, FieldSpec, Rational, Scalar};
use crate::poly::Poly;

/// A simple algebraic extension `Q[a]/(p(a))` with a fixed complex embedding
/// of the generator.
#[derive(Debug)]
pub struct ExtensionField {
    minpoly: Vec<Rational>,
    generator: String,
    named: BTreeMap<String, Vec<Rational>>,
    embedding: Complex64,
}

impl PartialEq for ExtensionField {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly
    }
}

impl ExtensionField {
    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    pub fn minpoly(&self) -> Poly<Rational> {
        Poly::new(self.minpoly.clone())
    }

    pub fn minpoly_string(&self) -> String {
        self.minpoly().to_string()
    }

    pub fn generator_name(&self) -> &str {
        &self.generator
    }

    /// Complex image of the generator.
    pub fn embedding(&self) -> Complex64 {
        self.embedding
    }

    pub fn named_roots(&self) -> impl Iterator<Item = (&str, &[Rational])> {
        self.named.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Coefficient vector bound to a symbol: the generator or a named root.
    pub fn symbol_coeffs(&self, name: &str) -> Option<Vec<Rational>> {
        if name == self.generator {
            let mut v = vec![Rational::zero(); 2];
            v[1] = Rational::one();
            Some(v)
        } else {
            self.named.get(name).cloned()
        }
    }

    pub fn eval_complex(&self, coeffs: &[Rational]) -> Complex64 {
        let mut acc = Complex64::zero();
        for c in coeffs.iter().rev() {
            acc = acc * self.embedding + Complex64::from_rational(c);
        }
        acc
    }

    fn reduce(&self, mut v: Vec<Rational>) -> Vec<Rational> {
        let n = self.degree();
        while v.len() > n {
            let top = v.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let base = v.len() - n;
            for j in 0..n {
                let t = &top * &self.minpoly[j];
                v[base + j] -= t;
            }
        }
        trim(&mut v);
        v
    }
}

fn trim(v: &mut Vec<Rational>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

/// Builds `Q[a]/(minpoly)`.
///
/// `generator` names the class of `a` in text; `named` binds extra labels to
/// coefficient vectors, each of which must itself be a root of `minpoly`.
/// `embedding_hint` selects the complex root closest to it as the image of
/// `a`; without a hint the root with largest imaginary part (then largest
/// real part) is used.
pub fn make_extension(
    minpoly: &Poly<Rational>,
    generator: &str,
    named: &[(String, Vec<Rational>)],
    embedding_hint: Option<Complex64>,
) -> Result<Arc<ExtensionField>, FieldError> {
    let deg = minpoly.degree().unwrap_or(0);
    if minpoly.is_zero() || !minpoly.leading().is_one() {
        return Err(FieldError::NotMonic);
    }
    if deg < 2 {
        return Err(FieldError::DegreeTooSmall(deg));
    }
    if let Some(factor) = find_rational_factor(minpoly) {
        return Err(FieldError::NotIrreducible(factor.to_string()));
    }
    let approx: Vec<Complex64> = minpoly
        .coeffs()
        .iter()
        .map(Complex64::from_rational)
        .collect();
    let roots = complex_roots(&approx);
    let embedding = match embedding_hint {
        Some(h) => *roots
            .iter()
            .min_by(|a, b| (*a - h).norm().total_cmp(&(*b - h).norm()))
            .unwrap(),
        None => *roots
            .iter()
            .max_by(|a, b| {
                let key = |z: &Complex64| (round_key(z.im), round_key(z.re));
                key(a).cmp(&key(b))
            })
            .unwrap(),
    };
    let mut field = ExtensionField {
        minpoly: minpoly.coeffs().to_vec(),
        generator: generator.to_string(),
        named: BTreeMap::new(),
        embedding,
    };
    for (name, coeffs) in named {
        let reduced = field.reduce(coeffs.clone());
        field.named.insert(name.clone(), reduced);
    }
    let field = Arc::new(field);
    for (name, coeffs) in field.named.iter() {
        let r = ExtElem::new(&field, coeffs.clone());
        let value = eval_rational_poly_at(minpoly, &r);
        if !value.is_zero() {
            return Err(FieldError::BadNamedRoot(name.clone()));
        }
    }
    Ok(field)
}

fn round_key(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

fn eval_rational_poly_at(p: &Poly<Rational>, x: &ExtElem) -> ExtElem {
    let mut acc = ExtElem::zero();
    for c in p.coeffs().iter().rev() {
        acc = acc * x.clone() + ExtElem::rational(c.clone());
    }
    acc
}

/// Searches for a monic factor of degree `1..=deg/2` over the rationals.
///
/// The polynomial is rescaled to a monic integer polynomial, candidate
/// factors are formed from subsets of its numerically computed roots with
/// rounded integer coefficients, and every candidate is confirmed by exact
/// division. A reported factor is therefore always genuine.
fn find_rational_factor(p: &Poly<Rational>) -> Option<Poly<Rational>> {
    let n = p.degree()?;
    let den = p
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    // q(y) = den^n p(y/den), monic with integer coefficients
    let mut q_coeffs = Vec::with_capacity(n + 1);
    for (k, c) in p.coeffs().iter().enumerate() {
        let scale = num_traits::pow(den.clone(), n - k);
        q_coeffs.push(c * Rational::from_integer(scale));
    }
    let q = Poly::new(q_coeffs);
    let approx: Vec<Complex64> = q.coeffs().iter().map(Complex64::from_rational).collect();
    let roots = complex_roots(&approx);
    for k in 1..=n / 2 {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut prod = vec![Complex64::new(1.0, 0.0)];
            for &i in &idx {
                let mut next = vec![Complex64::zero(); prod.len() + 1];
                for (j, c) in prod.iter().enumerate() {
                    next[j + 1] += c;
                    next[j] -= c * roots[i];
                }
                prod = next;
            }
            let candidate: Option<Vec<Rational>> = prod
                .iter()
                .map(|c| {
                    let r = c.re.round();
                    let ok = (c.re - r).abs() <= 1e-6 * (1.0 + r.abs()) && c.im.abs() <= 1e-6 * (1.0 + r.abs());
                    if ok && r.abs() < 9.0e15 {
                        Some(Rational::from_integer(BigInt::from(r as i64)))
                    } else {
                        None
                    }
                })
                .collect();
            if let Some(c) = candidate {
                let f = Poly::new(c);
                if let Ok((_, r)) = q.div_rem(&f) {
                    if r.is_zero() {
                        // undo the rescaling: f(den x) / den^k is the factor of p
                        let inv = Rational::new(BigInt::one(), den.clone());
                        let back: Vec<Rational> = f
                            .coeffs()
                            .iter()
                            .enumerate()
                            .map(|(j, c)| c * num_traits::pow(inv.clone(), k - j))
                            .collect();
                        return Some(Poly::new(back));
                    }
                }
            }
            // next k-subset in lexicographic order
            let mut pos = k;
            while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            for j in pos..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    None
}

/// Element of a simple extension, stored as its reduced coefficient vector
/// in the powers of the generator.
///
/// `field == None` marks a rational constant, which embeds in every
/// extension; this is what `Zero::zero()` and `One::one()` produce.
#[derive(Clone)]
pub struct ExtElem {
    coeffs: Vec<Rational>,
    field: Option<Arc<ExtensionField>>,
}

impl ExtElem {
    pub fn new(field: &Arc<ExtensionField>, coeffs: Vec<Rational>) -> Self {
        ExtElem {
            coeffs: field.reduce(coeffs),
            field: Some(field.clone()),
        }
    }

    pub fn rational(q: Rational) -> Self {
        let mut coeffs = vec![q];
        trim(&mut coeffs);
        ExtElem { coeffs, field: None }
    }

    pub fn generator(field: &Arc<ExtensionField>) -> Self {
        ExtElem::new(field, vec![Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn field(&self) -> Option<&Arc<ExtensionField>> {
        self.field.as_ref()
    }

    /// The rational value, if this element lies in the prime field.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match &self.field {
            Some(f) => f.eval_complex(&self.coeffs),
            None => self
                .coeffs
                .first()
                .map(Complex64::from_rational)
                .unwrap_or_default(),
        }
    }

    pub fn same_field(&self, other: &ExtElem) -> bool {
        match (&self.field, &other.field) {
            (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => true,
        }
    }

    fn merged_field(&self, other: &ExtElem) -> Option<Arc<ExtensionField>> {
        match (&self.field, &other.field) {
            (Some(a), Some(b)) => {
                assert!(
                    Arc::ptr_eq(a, b) || a == b,
                    "arithmetic between different extension fields"
                );
                Some(a.clone())
            }
            (Some(a), None) => Some(a.clone()),
            (None, b) => b.clone(),
        }
    }

    fn build(field: Option<Arc<ExtensionField>>, coeffs: Vec<Rational>) -> Self {
        match field {
            Some(f) => {
                let coeffs = f.reduce(coeffs);
                ExtElem {
                    coeffs,
                    field: Some(f),
                }
            }
            None => {
                let mut coeffs = coeffs;
                trim(&mut coeffs);
                ExtElem {
                    coeffs,
                    field: None,
                }
            }
        }
    }
}

impl PartialEq for ExtElem {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && (self.coeffs.len() <= 1 || self.same_field(other))
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtElem({})", self)
    }
}

impl fmt::Display for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let gen = self
            .field
            .as_ref()
            .map(|e| e.generator.as_str())
            .unwrap_or("a");
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push(if neg { '-' } else { '+' });
            }
            let var = match k {
                0 => String::new(),
                1 => gen.to_string(),
                _ => format!("{}^{}", gen, k),
            };
            if k == 0 {
                out.push_str(&abs.to_string());
            } else if abs.is_one() {
                out.push_str(&var);
            } else {
                out.push_str(&format!("{}*{}", abs, var));
            }
        }
        f.write_str(&out)
    }
}

impl Zero for ExtElem {
    fn zero() -> Self {
        ExtElem {
            coeffs: Vec::new(),
            field: None,
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for ExtElem {
    fn one() -> Self {
        ExtElem::rational(Rational::one())
    }
}

impl Add for ExtElem {
    type Output = ExtElem;

    fn add(self, rhs: ExtElem) -> ExtElem {
        let field = self.merged_field(&rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut v = vec![Rational::zero(); n];
        for (i, c) in self.coeffs.into_iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in rhs.coeffs.into_iter().enumerate() {
            v[i] += c;
        }
        ExtElem::build(field, v)
    }
}

impl Sub for ExtElem {
    type Output = ExtElem;

    fn sub(self, rhs: ExtElem) -> ExtElem {
        self + (-rhs)
    }
}

impl Neg for ExtElem {
    type Output = ExtElem;

    fn neg(self) -> ExtElem {
        ExtElem {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
            field: self.field,
        }
    }
}

impl Mul for ExtElem {
    type Output = ExtElem;

    fn mul(self, rhs: ExtElem) -> ExtElem {
        let field = self.merged_field(&rhs);
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return ExtElem::build(field, Vec::new());
        }
        let mut v = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        ExtElem::build(field, v)
    }
}

impl Scalar for ExtElem {
    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        match &self.field {
            None => Some(ExtElem::rational(self.coeffs[0].recip())),
            Some(f) => {
                // s*elem + t*minpoly = 1 in Q[x]
                let elem = Poly::new(self.coeffs.clone());
                let (g, s, _t) = elem.gcd_ext(&f.minpoly());
                debug_assert!(g.is_one());
                Some(ExtElem::new(f, s.coeffs().to_vec()))
            }
        }
    }

    fn from_int(n: i64) -> Self {
        ExtElem::rational(Rational::from_int(n))
    }

    fn from_rational(q: &Rational) -> Self {
        ExtElem::rational(q.clone())
    }

    fn is_exact() -> bool {
        true
    }

    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }

    fn to_c64(&self) -> Complex64 {
        self.to_complex()
    }

    fn resolve_symbol(name: &str, field: &FieldSpec) -> Option<Self> {
        let ext = field.extension()?;
        ext.symbol_coeffs(name).map(|c| ExtElem::new(ext, c))
    }

    fn same_field(&self, other: &Self) -> bool {
        ExtElem::same_field(self, other)
    }
}

impl Field for ExtElem {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qp(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&c| Rational::from_int(c)).collect())
    }

    fn elem(f: &Arc<ExtensionField>, a: i64, b: i64) -> ExtElem {
        ExtElem::new(f, vec![Rational::from_int(a), Rational::from_int(b)])
    }

    #[test]
    fn cube_root_of_unity() {
        let f = make_extension(&qp(&[1, 1, 1]), "a", &[], None).unwrap();
        let w = ExtElem::generator(&f);
        assert!(!w.is_one());
        let w3 = w.clone() * w.clone() * w.clone();
        assert!(w3.is_one());
        assert_eq!((w.clone() * w).to_string(), "-1-a");
    }

    #[test]
    fn square_root_of_two() {
        let f = make_extension(&qp(&[-2, 0, 1]), "a", &[], None).unwrap();
        let r = ExtElem::generator(&f);
        assert_eq!(r.clone() * r, ExtElem::from_int(2));
    }

    #[test]
    fn rejects_bad_minimal_polynomials() {
        assert!(matches!(
            make_extension(&qp(&[-1, 0, 1]), "a", &[], None),
            Err(FieldError::NotIrreducible(_))
        ));
        assert_eq!(
            make_extension(&qp(&[1, 0, 2]), "a", &[], None).unwrap_err(),
            FieldError::NotMonic
        );
        assert_eq!(
            make_extension(&qp(&[1, 1]), "a", &[], None).unwrap_err(),
            FieldError::DegreeTooSmall(1)
        );
        // (x^2+1)(x^2+2) has no linear factor
        assert!(matches!(
            make_extension(&qp(&[2, 0, 3, 0, 1]), "a", &[], None),
            Err(FieldError::NotIrreducible(_))
        ));
    }

    #[test]
    fn named_roots_are_checked() {
        let w2 = vec![Rational::from_int(-1), Rational::from_int(-1)];
        let f = make_extension(&qp(&[1, 1, 1]), "a", &[("w2".into(), w2)], None).unwrap();
        assert_eq!(f.named_roots().count(), 1);
        let bad = vec![Rational::from_int(1)];
        assert_eq!(
            make_extension(&qp(&[1, 1, 1]), "a", &[("one".into(), bad)], None).unwrap_err(),
            FieldError::BadNamedRoot("one".into())
        );
    }

    proptest! {
        #[test]
        fn field_axioms(a in -9i64..9, b in -9i64..9, c in -9i64..9, d in -9i64..9, e in -9i64..9, g in -9i64..9) {
            let f = make_extension(&qp(&[1, 1, 1]), "a", &[], None).unwrap();
            let (x, y, z) = (elem(&f, a, b), elem(&f, c, d), elem(&f, e, g));
            prop_assert_eq!((x.clone() * y.clone()) * z.clone(), x.clone() * (y.clone() * z.clone()));
            prop_assert_eq!(x.clone() * (y.clone() + z.clone()), x.clone() * y.clone() + x.clone() * z);
            if !x.is_zero() {
                prop_assert!((x.clone() * x.try_inv().unwrap()).is_one());
            }
        }

        #[test]
        fn rationals_embed(a in -50i64..50, b in 1i64..50, c in -50i64..50) {
            let f = make_extension(&qp(&[-2, 0, 1]), "a", &[], None).unwrap();
            let (p, q) = (Rational::new(a.into(), b.into()), Rational::from_int(c));
            let lift = |r: &Rational| ExtElem::new(&f, vec![r.clone()]);
            prop_assert_eq!(lift(&p) * lift(&q), lift(&(p.clone() * q.clone())));
            prop_assert_eq!(lift(&p) + lift(&q), lift(&(p + q)));
        }
    }
}
