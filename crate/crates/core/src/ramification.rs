//! Ramification sequences, exponents of polynomial subspaces, and the basic
//! situation `(d, N, z_s, a(z_s), a(inf))` with its derived `K_i`, `T_i`, `l_i`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::field::Field;
use crate::linalg::rref;
use crate::poly::{wronskian, Poly};

/// Relative pivot tolerance used for floating coefficients.
pub const NUMERIC_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RamError {
    #[error("basis is linearly dependent")]
    DependentBasis,
    #[error("exponents {0:?} do not come from a ramification sequence")]
    NotRealizable(Vec<usize>),
    #[error("codimensions sum to {got}, expected (N+1)(d-N) = {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("l_{index} = {value} is negative")]
    NegativeLength { index: usize, value: i64 },
    #[error("marked points are not pairwise distinct")]
    DuplicatePoints,
    #[error("bad ramification sequence: {0}")]
    BadSequence(String),
    #[error("ramification check failed at {0}")]
    CheckFailed(String),
}

/// `a_1 >= a_2 >= ... >= a_{N+1} >= 0` with `a_1 <= d - N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RamificationSequence(Vec<usize>);

impl RamificationSequence {
    pub fn new(entries: Vec<usize>, d: usize, n: usize) -> Result<Self, RamError> {
        if entries.len() != n + 1 {
            return Err(RamError::BadSequence(format!(
                "{:?} has length {}, expected N+1 = {}",
                entries,
                entries.len(),
                n + 1
            )));
        }
        if entries.windows(2).any(|w| w[0] < w[1]) {
            return Err(RamError::BadSequence(format!("{:?} is not weakly decreasing", entries)));
        }
        if n > d || entries[0] > d - n {
            return Err(RamError::BadSequence(format!(
                "{:?} has a_1 > d - N = {}",
                entries,
                d.saturating_sub(n)
            )));
        }
        Ok(RamificationSequence(entries))
    }

    pub fn zero(n: usize) -> Self {
        RamificationSequence(vec![0; n + 1])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// `a_i`, 1-based.
    pub fn a(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    /// Codimension `|a|`.
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Sum of the last `i` entries.
    pub fn tail_sum(&self, i: usize) -> usize {
        self.0[self.0.len() - i..].iter().sum()
    }
}

impl fmt::Display for RamificationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Strictly increasing orders (finite point) or degrees (infinity).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ExponentSet(pub Vec<usize>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Finite,
    Infinity,
}

fn rank_tol<F: Field>() -> f64 {
    if F::is_exact() {
        0.0
    } else {
        NUMERIC_RANK_TOL
    }
}

/// Pivot positions of the coefficient matrix, columns ordered by `order`.
fn pivot_powers<F: Field>(basis: &[Poly<F>], order: &[usize]) -> Result<Vec<usize>, RamError> {
    let mut rows: Vec<Vec<F>> = basis
        .iter()
        .map(|p| order.iter().map(|&k| p.coeff(k)).collect())
        .collect();
    let pivots = rref(&mut rows, order.len(), rank_tol::<F>());
    if pivots.len() != basis.len() {
        return Err(RamError::DependentBasis);
    }
    let mut out: Vec<usize> = pivots.into_iter().map(|c| order[c]).collect();
    out.sort_unstable();
    Ok(out)
}

fn max_degree<F: Field>(basis: &[Poly<F>]) -> usize {
    basis.iter().map(|p| p.deg()).max().unwrap_or(0)
}

/// Orders of vanishing at `z` realized by the span of `basis`.
pub fn exponents_at<F: Field>(basis: &[Poly<F>], z: &F) -> Result<ExponentSet, RamError> {
    let shifted: Vec<Poly<F>> = basis.iter().map(|p| p.shift(z)).collect();
    let order: Vec<usize> = (0..=max_degree(&shifted)).collect();
    pivot_powers(&shifted, &order).map(ExponentSet)
}

/// Degrees realized by the span of `basis`.
pub fn exponents_at_infinity<F: Field>(basis: &[Poly<F>]) -> Result<ExponentSet, RamError> {
    let order: Vec<usize> = (0..=max_degree(basis)).rev().collect();
    pivot_powers(basis, &order).map(ExponentSet)
}

pub fn ram_from_exponents(
    e: &ExponentSet,
    d: usize,
    place: Place,
) -> Result<RamificationSequence, RamError> {
    let eps = &e.0;
    let m = eps.len();
    if m == 0 || eps.windows(2).any(|w| w[0] >= w[1]) || eps[m - 1] > d {
        return Err(RamError::NotRealizable(eps.clone()));
    }
    let n = m - 1;
    let a: Option<Vec<usize>> = (1..=m)
        .map(|i| match place {
            // a_i = eps_{N+2-i} - (N+1-i)
            Place::Finite => eps[n + 1 - i].checked_sub(n + 1 - i),
            // a_i = d - (N+1) + i - eps_i
            Place::Infinity => (d + i).checked_sub(n + 1 + eps[i - 1]),
        })
        .collect();
    let a = a.ok_or_else(|| RamError::NotRealizable(eps.clone()))?;
    RamificationSequence::new(a, d, n).map_err(|_| RamError::NotRealizable(eps.clone()))
}

/// Validated basic situation with derived data.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSituation<F> {
    pub d: usize,
    pub n: usize,
    pub points: Vec<F>,
    pub ram: Vec<RamificationSequence>,
    pub infinity: RamificationSequence,
    /// `K_0, ..., K_{N+1}`.
    pub k: Vec<Poly<F>>,
    /// `T_0 = K_1, T_1, ..., T_N`.
    pub t: Vec<Poly<F>>,
    /// `l_1, ..., l_N`.
    pub l: Vec<usize>,
}

impl<F: Field> BasicSituation<F> {
    /// Number of marked finite points.
    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    /// `(N+1)(d-N)`.
    pub fn grassmannian_dim(&self) -> usize {
        (self.n + 1) * (self.d - self.n)
    }

    /// `T_i = prod_s (x - z_s)^(a_{N+1-i}(z_s) - a_{N+2-i}(z_s))`, computed
    /// directly from the sequences, for `i = 1..N`.
    pub fn t_from_differences(&self, i: usize) -> Poly<F> {
        let n = self.n;
        self.points
            .iter()
            .zip(&self.ram)
            .fold(Poly::one(), |acc, (z, a)| {
                let e = a.a(n + 1 - i) - a.a(n + 2 - i);
                &acc * &Poly::linear(z.clone()).pow(e as u32)
            })
    }

    /// Roots of `T_0 ... T_N`, i.e. the marked points with nonzero ramification.
    pub fn singular_points(&self) -> Vec<F> {
        self.points
            .iter()
            .zip(&self.ram)
            .filter(|(_, a)| a.size() > 0)
            .map(|(z, _)| z.clone())
            .collect()
    }
}

pub fn validate_basic<F: Field>(
    d: usize,
    n: usize,
    points: Vec<(F, Vec<usize>)>,
    infinity: Vec<usize>,
) -> Result<BasicSituation<F>, RamError> {
    if n > d {
        return Err(RamError::BadSequence(format!("N = {} exceeds d = {}", n, d)));
    }
    let mut zs = Vec::with_capacity(points.len());
    let mut ram = Vec::with_capacity(points.len());
    for (z, a) in points {
        if zs.contains(&z) {
            return Err(RamError::DuplicatePoints);
        }
        zs.push(z);
        ram.push(RamificationSequence::new(a, d, n)?);
    }
    let infinity = RamificationSequence::new(infinity, d, n)?;
    let expected = (n + 1) * (d - n);
    let got = ram.iter().map(|a| a.size()).sum::<usize>() + infinity.size();
    if got != expected {
        return Err(RamError::DimensionMismatch { expected, got });
    }
    let k: Vec<Poly<F>> = (0..=n + 1)
        .map(|i| {
            zs.iter().zip(&ram).fold(Poly::one(), |acc, (z, a)| {
                let e = if i == 0 { 0 } else { a.tail_sum(i) };
                &acc * &Poly::linear(z.clone()).pow(e as u32)
            })
        })
        .collect();
    let mut t = vec![k[1].clone()];
    for i in 1..=n {
        let num = &k[i + 1] * &k[i - 1];
        let den = &k[i] * &k[i];
        let ti = num
            .exact_div(&den)
            .map_err(|_| RamError::BadSequence(format!("K_{}^2 does not divide K_{} K_{}", i, i + 1, i - 1)))?;
        t.push(ti);
    }
    let mut l = Vec::with_capacity(n);
    for i in 1..=n {
        let value = (i * (d + 1 - i)) as i64
            - infinity.tail_sum(i) as i64
            - ram.iter().map(|a| a.tail_sum(i) as i64).sum::<i64>();
        if value < 0 {
            return Err(RamError::NegativeLength { index: i, value });
        }
        l.push(value as usize);
    }
    Ok(BasicSituation {
        d,
        n,
        points: zs,
        ram,
        infinity,
        k,
        t,
        l,
    })
}

/// Per-point outcome of [`wronskian_ram_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCheck {
    pub point: String,
    pub expected_order: usize,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamCheckReport {
    pub points: Vec<PointCheck>,
    pub expected_degree: usize,
    pub degree: usize,
}

/// `ord_z Wr(E_i) = sum of the exponents of E_i at z - i(i-1)/2`, checked for
/// every prefix `E_i` of `basis`.
pub fn filtration_order_check<F: Field>(basis: &[Poly<F>], z: &F) -> Result<(), RamError> {
    for i in 1..=basis.len() {
        let e = exponents_at(&basis[..i], z)?;
        let w = wronskian(&basis[..i]);
        let ord = w.ord_at(z).map_err(|_| RamError::DependentBasis)?;
        let expected = e.0.iter().sum::<usize>() - i * (i - 1) / 2;
        if ord != expected {
            return Err(RamError::CheckFailed(format!(
                "{}: ord Wr(E_{}) = {}, exponent formula gives {}",
                z, i, ord, expected
            )));
        }
    }
    Ok(())
}

/// Checks `ord_z Wr(V) = |a(z)|` at every marked point, the degree
/// `deg Wr(V) = (N+1)(d-N) - |a(inf)|`, and the filtration refinement.
pub fn wronskian_ram_check<F: Field>(
    basis: &[Poly<F>],
    basic: &BasicSituation<F>,
) -> Result<RamCheckReport, RamError> {
    let w = wronskian(basis);
    if w.is_zero() {
        return Err(RamError::DependentBasis);
    }
    let mut points = Vec::new();
    for (z, a) in basic.points.iter().zip(&basic.ram) {
        let order = w.ord_at(z).map_err(|_| RamError::DependentBasis)?;
        let check = PointCheck {
            point: z.to_string(),
            expected_order: a.size(),
            order,
        };
        if order != a.size() {
            return Err(RamError::CheckFailed(format!(
                "{}: ord Wr = {}, expected |a| = {}",
                z, order, check.expected_order
            )));
        }
        filtration_order_check(basis, z)?;
        points.push(check);
    }
    let expected_degree = basic.grassmannian_dim() - basic.infinity.size();
    if w.deg() != expected_degree {
        return Err(RamError::CheckFailed(format!(
            "infinity: deg Wr = {}, expected {}",
            w.deg(),
            expected_degree
        )));
    }
    Ok(RamCheckReport {
        points,
        expected_degree,
        degree: w.deg(),
    })
}

/// For a basis adapted to a filtration `E_1 < ... < E_{N+1}`, returns `w`
/// (1-based) with `{c_w(1), ..., c_w(i)}` the degrees realized by `E_i`,
/// where `c_1 > ... > c_{N+1}` are the degrees realized by the whole span.
pub fn filtration_permutation<F: Field>(basis: &[Poly<F>]) -> Result<Vec<usize>, RamError> {
    let mut c = exponents_at_infinity(basis)?.0;
    c.reverse();
    let mut w = Vec::with_capacity(basis.len());
    let mut prev: Vec<usize> = Vec::new();
    for i in 1..=basis.len() {
        let e = exponents_at_infinity(&basis[..i])?.0;
        let new = e
            .iter()
            .copied()
            .find(|x| !prev.contains(x))
            .ok_or(RamError::DependentBasis)?;
        let pos = c
            .iter()
            .position(|&x| x == new)
            .ok_or(RamError::DependentBasis)?;
        w.push(pos + 1);
        prev = e;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_extension, ExtElem, Rational, Scalar};
    use proptest::prelude::*;

    fn q(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&c| Rational::from_int(c)).collect())
    }

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn exponents_of_cube_example_span() {
        let basis = [q(&[0, 1]), q(&[2, 0, 0, 1])];
        assert_eq!(exponents_at(&basis, &r(1)).unwrap().0, vec![0, 2]);
        assert_eq!(exponents_at_infinity(&basis).unwrap().0, vec![1, 3]);
        let mono = [q(&[1]), q(&[0, 1]), q(&[0, 0, 1])];
        assert_eq!(exponents_at(&mono, &r(7)).unwrap().0, vec![0, 1, 2]);
        assert_eq!(exponents_at_infinity(&[q(&[0, 1, 1]), q(&[0, 0, 1])]).unwrap().0, vec![1, 2]);
        assert_eq!(
            exponents_at(&[q(&[0, 1]), q(&[0, 2])], &r(0)),
            Err(RamError::DependentBasis)
        );
    }

    #[test]
    fn exponents_at_cube_root_of_unity() {
        let ext = make_extension(&q(&[1, 1, 1]), "a", &[], None).unwrap();
        let lift = |p: Poly<Rational>| p.map(|c| ExtElem::rational(c.clone()));
        let basis = [lift(q(&[0, 1])), lift(q(&[2, 0, 0, 1]))];
        let w = ExtElem::generator(&ext);
        assert_eq!(exponents_at(&basis, &w).unwrap().0, vec![0, 2]);
        let e = exponents_at(&basis, &(w.clone() * w)).unwrap();
        assert_eq!(ram_from_exponents(&e, 3, Place::Finite).unwrap().entries(), &[1, 0]);
    }

    #[test]
    fn sequences_from_exponents() {
        let fin = ram_from_exponents(&ExponentSet(vec![0, 2]), 3, Place::Finite).unwrap();
        assert_eq!(fin.entries(), &[1, 0]);
        let inf = ram_from_exponents(&ExponentSet(vec![1, 3]), 3, Place::Infinity).unwrap();
        assert_eq!(inf.entries(), &[1, 0]);
        let triv = ram_from_exponents(&ExponentSet(vec![0, 1, 2]), 5, Place::Finite).unwrap();
        assert_eq!(triv.entries(), &[0, 0, 0]);
    }

    fn example_situation() -> BasicSituation<ExtElem> {
        let ext = make_extension(&q(&[1, 1, 1]), "a", &[], None).unwrap();
        let w = ExtElem::generator(&ext);
        let pts = vec![ExtElem::from_int(1), w.clone(), w.clone() * w];
        validate_basic(3, 1, pts.into_iter().map(|z| (z, vec![1, 0])).collect(), vec![1, 0]).unwrap()
    }

    #[test]
    fn cube_example_basic_situation() {
        let b = example_situation();
        let cube = q(&[-1, 0, 0, 1]).map(|c| ExtElem::rational(c.clone()));
        assert_eq!(b.t[1], cube);
        assert!(b.t[0].is_one());
        assert_eq!(b.l, vec![3]);
        assert_eq!(b.t_from_differences(1), b.t[1]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let pts = vec![(r(1), vec![1, 0]), (r(2), vec![1, 0]), (r(3), vec![1, 0])];
        assert_eq!(
            validate_basic(3, 1, pts, vec![2, 0]),
            Err(RamError::DimensionMismatch { expected: 4, got: 5 })
        );
        let dup = vec![(r(1), vec![1, 0]), (r(1), vec![1, 0]), (r(3), vec![1, 0])];
        assert_eq!(validate_basic(3, 1, dup, vec![1, 0]), Err(RamError::DuplicatePoints));
        assert!(matches!(
            validate_basic::<Rational>(3, 1, vec![], vec![3, 1]),
            Err(RamError::BadSequence(_))
        ));
    }

    #[test]
    fn wronskian_check_on_example() {
        let b = example_situation();
        let lift = |p: Poly<Rational>| p.map(|c| ExtElem::rational(c.clone()));
        let basis = [lift(q(&[0, 1])), lift(q(&[2, 0, 0, 1]))];
        let rep = wronskian_ram_check(&basis, &b).unwrap();
        assert!(rep.points.iter().all(|p| p.order == 1));
        assert_eq!(rep.degree, 3);
        assert_eq!(filtration_permutation(&basis).unwrap(), vec![2, 1]);
    }

    #[test]
    fn unramified_span() {
        let basis = [q(&[1]), q(&[0, 1])];
        assert!(crate::poly::wronskian(&basis).is_one());
        let b = validate_basic::<Rational>(1, 1, vec![], vec![0, 0]).unwrap();
        assert!(wronskian_ram_check(&basis, &b).is_ok());
    }

    #[test]
    fn filtration_order_at_origin() {
        // E_1 = span{x^2}, E_2 = span{x^2, 1 + x^3}: exponents {2}, {0, 2}
        let basis = [q(&[0, 0, 1]), q(&[1, 0, 0, 1])];
        assert!(filtration_order_check(&basis, &r(0)).is_ok());
        assert_eq!(crate::poly::wronskian(&basis[..1]).ord_at(&r(0)), Ok(2));
    }

    fn random_situation() -> impl Strategy<Value = (usize, usize, Vec<Vec<usize>>)> {
        (1usize..=3, 0usize..=3).prop_flat_map(|(n, extra)| {
            let d = n + 1 + extra;
            let seq = prop::collection::vec(0..=d - n, n + 1).prop_map(|mut v| {
                v.sort_unstable_by(|a, b| b.cmp(a));
                v
            });
            (Just(n), Just(d), prop::collection::vec(seq, 1..=4))
        })
    }

    proptest! {
        #[test]
        fn two_definitions_of_t_agree((n, d, seqs) in random_situation()) {
            let total: usize = seqs.iter().map(|s| s.iter().sum::<usize>()).sum();
            let dim = (n + 1) * (d - n);
            prop_assume!(total <= dim);
            // put the remaining codimension at infinity when it fits
            let mut rest = dim - total;
            let mut inf = vec![0; n + 1];
            for a in inf.iter_mut() {
                let take = rest.min(d - n);
                *a = take;
                rest -= take;
            }
            prop_assume!(rest == 0);
            let pts: Vec<(Rational, Vec<usize>)> = seqs
                .into_iter()
                .enumerate()
                .map(|(s, a)| (r(s as i64 - 1), a))
                .collect();
            match validate_basic(d, n, pts, inf) {
                Ok(b) => {
                    for i in 1..=n {
                        prop_assert_eq!(b.t_from_differences(i), b.t[i].clone());
                    }
                }
                Err(RamError::NegativeLength { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected {:?}", e),
            }
        }

        #[test]
        fn exponents_invariant_under_basis_change(
            a in -3i64..=3, b in -3i64..=3, c in -3i64..=3, z in -2i64..=2
        ) {
            let u = [q(&[1, 0, 1]), q(&[0, 1, 0, 1])];
            // [[1, a], [b, c]] with nonzero determinant c - a*b
            prop_assume!(c - a * b != 0);
            let v = [
                &u[0] + &u[1].scale(&r(a)),
                &u[0].scale(&r(b)) + &u[1].scale(&r(c)),
            ];
            prop_assert_eq!(exponents_at(&u, &r(z)).unwrap(), exponents_at(&v, &r(z)).unwrap());
            prop_assert_eq!(exponents_at_infinity(&u).unwrap(), exponents_at_infinity(&v).unwrap());
        }
    }
}
