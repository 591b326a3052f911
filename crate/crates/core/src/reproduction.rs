//! Fertile tuples and the reproduction procedure that turns a fertile tuple
//! `(y_1, ..., y_N)` into a basis `u_1, ..., u_{N+1}` with
//! `Wr(u_1, ..., u_i)` proportional to `K_i y_i`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::Field;
use crate::poly::{wronskian, Poly};
use crate::ramification::{
    exponents_at, exponents_at_infinity, BasicSituation, RamError,
};
use crate::wronskian_eq::{normalize_generic, solve, WronskianError, DEFAULT_LADDER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReproError {
    #[error("tuple is not fertile: {0}")]
    NotFertile(String),
    #[error("direction {0} is out of range")]
    BadDirection(usize),
    #[error(transparent)]
    Wronskian(#[from] WronskianError),
    #[error(transparent)]
    Ram(#[from] RamError),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("Wr(E_{0}) is not divisible by K_{0}")]
    NotDivisible(usize),
    #[error("identity Wr(y_i, Q_i) = T_i y_(i-1) y_(i+1) failed for i = {0}")]
    IdentityFailed(usize),
}

/// `(y_1..y_N; T_0..T_N)` together with the known points of `S`.
///
/// `points` should list the roots of the `T_j` that lie in the coefficient
/// field; exponent tables are computed there. S-avoidance is checked through
/// coprimality with every `T_j`, so it does not depend on `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct FertileTuple<F> {
    pub y: Vec<Poly<F>>,
    pub t: Vec<Poly<F>>,
    pub points: Vec<F>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub index: usize,
    pub monic: bool,
    pub square_free: bool,
    pub avoids_s: bool,
    pub coprime_next: bool,
    pub divisible: bool,
}

impl IndexReport {
    pub fn ok(&self) -> bool {
        self.monic && self.square_free && self.avoids_s && self.coprime_next && self.divisible
    }

    fn failures(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.monic {
            v.push("monic");
        }
        if !self.square_free {
            v.push("square-free");
        }
        if !self.avoids_s {
            v.push("S-avoidance");
        }
        if !self.coprime_next {
            v.push("coprime to y_(i+1)");
        }
        if !self.divisible {
            v.push("divisibility");
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FertilityReport {
    pub entries: Vec<IndexReport>,
}

impl FertilityReport {
    pub fn is_fertile(&self) -> bool {
        self.entries.iter().all(|e| e.ok())
    }

    pub fn summary(&self) -> String {
        let bad: Vec<String> = self
            .entries
            .iter()
            .filter(|e| !e.ok())
            .map(|e| format!("y_{}: {}", e.index, e.failures().join(", ")))
            .collect();
        if bad.is_empty() {
            "fertile".to_string()
        } else {
            bad.join("; ")
        }
    }
}

impl<F: Field> FertileTuple<F> {
    pub fn new(y: Vec<Poly<F>>, t: Vec<Poly<F>>, points: Vec<F>) -> Self {
        assert_eq!(t.len(), y.len() + 1, "need T_0..T_N for y_1..y_N");
        FertileTuple { y, t, points }
    }

    /// The tuple over a basic situation, with its `T_i` and marked points.
    pub fn from_basic(basic: &BasicSituation<F>, y: Vec<Poly<F>>) -> Self {
        FertileTuple::new(y, basic.t.clone(), basic.singular_points())
    }

    /// All `y_i = 1`; fertile for any `T`.
    pub fn trivial(t: Vec<Poly<F>>, points: Vec<F>) -> Self {
        let n = t.len() - 1;
        FertileTuple::new(vec![Poly::one(); n], t, points)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// `y_i` for `i = 0..=N+1`, with `y_0 = y_{N+1} = 1`.
    pub fn y_ext(&self, i: usize) -> Poly<F> {
        if i == 0 || i > self.n() {
            Poly::one()
        } else {
            self.y[i - 1].clone()
        }
    }

    /// `K_i = T_0^i T_1^(i-1) ... T_(i-1)` for `i = 0..=N+1`.
    pub fn k(&self, i: usize) -> Poly<F> {
        (0..i).fold(Poly::one(), |acc, j| &acc * &self.t[j].pow((i - j) as u32))
    }

    pub fn k_all(&self) -> Vec<Poly<F>> {
        (0..=self.n() + 1).map(|i| self.k(i)).collect()
    }

    /// Right-hand side `T_i y_(i-1) y_(i+1)` of the i-th Wronskian equation.
    pub fn rhs(&self, i: usize) -> Poly<F> {
        &(&self.t[i] * &self.y_ext(i - 1)) * &self.y_ext(i + 1)
    }

    fn avoids_s(&self, p: &Poly<F>) -> bool {
        self.t.iter().all(|t| t.is_constant() || p.is_coprime(t))
            && self.points.iter().all(|z| !p.eval(z).is_zero())
    }

    pub fn fertility(&self) -> FertilityReport {
        let entries = (1..=self.n())
            .map(|i| {
                let y = &self.y[i - 1];
                let square_free = y.is_square_free();
                let divisible = square_free && {
                    let w = wronskian(&[y.derivative(), self.rhs(i)]);
                    y.divides(&w)
                };
                IndexReport {
                    index: i,
                    monic: y.is_monic(),
                    square_free,
                    avoids_s: self.avoids_s(y),
                    coprime_next: y.is_coprime(&self.y_ext(i + 1)),
                    divisible,
                }
            })
            .collect();
        FertilityReport { entries }
    }

    pub fn is_fertile(&self) -> bool {
        self.fertility().is_fertile()
    }
}

/// Result of reproduction in one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Mutation<F> {
    pub tuple: FertileTuple<F>,
    pub direction: usize,
    /// The new monic `y_i`.
    pub y_new: Poly<F>,
    /// Ladder value added as `c * y_i` to the particular solution.
    pub c: i64,
    /// Leading coefficient removed when making the solution monic.
    pub lead: F,
}

/// Reproduction in direction `i`: replaces `y_i` by a generic monic solution
/// of `Wr(y_i, u) = T_i y_(i-1) y_(i+1)` and re-checks fertility.
pub fn mutate<F: Field>(tuple: &FertileTuple<F>, i: usize) -> Result<Mutation<F>, ReproError> {
    if i == 0 || i > tuple.n() {
        return Err(ReproError::BadDirection(i));
    }
    let y = &tuple.y[i - 1];
    let sol = solve(y, &tuple.rhs(i))?;
    let mut avoid: Vec<Poly<F>> = tuple.t.iter().filter(|t| !t.is_constant()).cloned().collect();
    avoid.push(tuple.y_ext(i - 1));
    avoid.push(tuple.y_ext(i + 1));
    let norm = normalize_generic(
        &sol.particular,
        &sol.homogeneous,
        &avoid,
        &tuple.points,
        DEFAULT_LADDER,
    )?;
    let mut next = tuple.clone();
    next.y[i - 1] = norm.poly.clone();
    if wronskian(&[y.clone(), norm.poly.scale(&norm.lead)]) != tuple.rhs(i) {
        return Err(ReproError::VerificationFailed(format!(
            "Wronskian equation in direction {}",
            i
        )));
    }
    let report = next.fertility();
    if !report.is_fertile() {
        return Err(ReproError::NotFertile(format!(
            "after reproduction in direction {}: {}",
            i,
            report.summary()
        )));
    }
    Ok(Mutation {
        tuple: next,
        direction: i,
        y_new: norm.poly,
        c: norm.c,
        lead: norm.lead,
    })
}

/// Exponents of `E_i` at one point, measured and predicted, `i = 1..=N+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentTable<F> {
    pub point: Option<F>,
    pub measured: Vec<Vec<usize>>,
    pub predicted: Vec<usize>,
}

impl<F> ExponentTable<F> {
    /// `measured[i-1]` equals `{predicted[0..i]}` for every `i`.
    pub fn agrees(&self) -> bool {
        self.measured.iter().enumerate().all(|(i, m)| {
            let mut p: Vec<usize> = self.predicted[..=i].to_vec();
            p.sort_unstable();
            *m == p
        })
    }
}

/// The constructed space with its filtration data.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySpace<F> {
    pub tuple: FertileTuple<F>,
    /// `u_1..u_{N+1}`.
    pub basis: Vec<Poly<F>>,
    /// `kappa_0..kappa_{N+1}` with `Wr(u_1..u_i) = kappa_i K_i y_i`, `kappa_0 = 1`.
    pub kappa: Vec<F>,
    /// `K_0..K_{N+1}`.
    pub k: Vec<Poly<F>>,
    /// Ladder choices of each cascade: `cascades[i-1]` builds `u_{i+1}`.
    pub cascades: Vec<Vec<(usize, i64)>>,
    pub finite: Vec<ExponentTable<F>>,
    pub infinity: ExponentTable<F>,
}

/// `e_i(z) = i - 1 + sum_{j<i} ord_z T_j`, `i = 1..=N+1`.
pub fn predicted_finite<F: Field>(tuple: &FertileTuple<F>, z: &F) -> Vec<usize> {
    let ords: Vec<usize> = tuple
        .t
        .iter()
        .map(|t| t.ord_at(z).unwrap_or(0))
        .collect();
    (1..=tuple.n() + 1)
        .map(|i| i - 1 + ords[..i].iter().sum::<usize>())
        .collect()
}

/// `c_i = i - 1 + deg y_i - deg y_(i-1) + sum_{j<i} deg T_j`, `i = 1..=N+1`.
pub fn predicted_infinity<F: Field>(tuple: &FertileTuple<F>) -> Vec<usize> {
    (1..=tuple.n() + 1)
        .map(|i| {
            let v = (i - 1 + tuple.y_ext(i).deg()) as i64 - tuple.y_ext(i - 1).deg() as i64
                + tuple.t[..i].iter().map(|t| t.deg() as i64).sum::<i64>();
            v.max(0) as usize
        })
        .collect()
}

/// `u_{i+1}` from the cascade in directions `i, i-1, ..., 1` started at the
/// original tuple.
/// A basis vector with the ladder choices that produced it.
type Cascade<F> = (Poly<F>, Vec<(usize, i64)>);

fn cascade<F: Field>(tuple: &FertileTuple<F>, i: usize) -> Result<Cascade<F>, ReproError> {
    let mut cur = tuple.clone();
    let mut log = Vec::with_capacity(i);
    for dir in (1..=i).rev() {
        let m = mutate(&cur, dir)?;
        log.push((dir, m.c));
        cur = m.tuple;
    }
    Ok((&tuple.k(1) * &cur.y[0], log))
}

pub fn build_space<F: Field>(tuple: &FertileTuple<F>) -> Result<PolySpace<F>, ReproError> {
    let report = tuple.fertility();
    if !report.is_fertile() {
        return Err(ReproError::NotFertile(report.summary()));
    }
    let n = tuple.n();
    let k = tuple.k_all();
    let u1 = &k[1] * &tuple.y_ext(1);
    let rest: Vec<Cascade<F>> = (1..=n)
        .into_par_iter()
        .map(|i| cascade(tuple, i))
        .collect::<Result<_, _>>()?;
    let mut basis = vec![u1];
    let mut cascades = Vec::with_capacity(n);
    for (u, log) in rest {
        basis.push(u);
        cascades.push(log);
    }

    let mut kappa = vec![F::one()];
    for i in 1..=n + 1 {
        let w = wronskian(&basis[..i]);
        let q = w.exact_div(&k[i]).map_err(|_| ReproError::NotDivisible(i))?;
        let y = tuple.y_ext(i);
        let c = q.leading();
        if c.is_zero() || q != y.scale(&c) {
            return Err(ReproError::VerificationFailed(format!(
                "Wr(u_1..u_{}) is not proportional to K_{} y_{}",
                i, i, i
            )));
        }
        kappa.push(c);
    }

    let measure = |z: Option<&F>| -> Result<Vec<Vec<usize>>, ReproError> {
        (1..=n + 1)
            .map(|i| {
                let e = match z {
                    Some(z) => exponents_at(&basis[..i], z)?,
                    None => exponents_at_infinity(&basis[..i])?,
                };
                Ok(e.0)
            })
            .collect()
    };
    let mut finite = Vec::with_capacity(tuple.points.len());
    for z in &tuple.points {
        let table = ExponentTable {
            point: Some(z.clone()),
            measured: measure(Some(z))?,
            predicted: predicted_finite(tuple, z),
        };
        if !table.agrees() {
            return Err(ReproError::VerificationFailed(format!(
                "exponents at {}: measured {:?}, predicted {:?}",
                z, table.measured, table.predicted
            )));
        }
        finite.push(table);
    }
    let infinity = ExponentTable {
        point: None,
        measured: measure(None)?,
        predicted: predicted_infinity(tuple),
    };
    if !infinity.agrees() {
        return Err(ReproError::VerificationFailed(format!(
            "exponents at infinity: measured {:?}, predicted {:?}",
            infinity.measured, infinity.predicted
        )));
    }
    Ok(PolySpace {
        tuple: tuple.clone(),
        basis,
        kappa,
        k,
        cascades,
        finite,
        infinity,
    })
}

/// `y_i = Wr(E_i) / K_i`, made monic, for `i = 1..N`.
pub fn theta_with<F: Field>(basis: &[Poly<F>], k: &[Poly<F>]) -> Result<Vec<Poly<F>>, ReproError> {
    let n = basis.len() - 1;
    (1..=n)
        .map(|i| {
            let w = wronskian(&basis[..i]);
            let q = w.exact_div(&k[i]).map_err(|_| ReproError::NotDivisible(i))?;
            q.monic().map_err(|_| ReproError::NotDivisible(i))
        })
        .collect()
}

pub fn theta<F: Field>(space: &PolySpace<F>, basic: &BasicSituation<F>) -> Result<Vec<Poly<F>>, ReproError> {
    theta_with(&space.basis, &basic.k)
}

/// `Q_i = Wr(u_1..u_(i-1), u_(i+1)) / K_i`, scaled so that
/// `Wr(y_i, Q_i) = T_i y_(i-1) y_(i+1)`; the identity is checked.
pub fn q_witness<F: Field>(space: &PolySpace<F>, i: usize) -> Result<Poly<F>, ReproError> {
    let n = space.tuple.n();
    if i == 0 || i > n {
        return Err(ReproError::BadDirection(i));
    }
    let mut args: Vec<Poly<F>> = space.basis[..i - 1].to_vec();
    args.push(space.basis[i].clone());
    let w = wronskian(&args);
    let q = w.exact_div(&space.k[i]).map_err(|_| ReproError::NotDivisible(i))?;
    let scale = space.kappa[i].clone() * (space.kappa[i - 1].clone() * space.kappa[i + 1].clone()).inv();
    let q = q.scale(&scale);
    let tuple = &space.tuple;
    if wronskian(&[tuple.y_ext(i), q.clone()]) != tuple.rhs(i) {
        return Err(ReproError::IdentityFailed(i));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_extension, ExtElem, Rational, Scalar};

    fn q(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&c| Rational::from_int(c)).collect())
    }

    fn example_tuple() -> FertileTuple<Rational> {
        FertileTuple::new(vec![q(&[0, 1])], vec![q(&[1]), q(&[-1, 0, 0, 1])], vec![Rational::from_int(1)])
    }

    #[test]
    fn fertility_checks() {
        assert!(example_tuple().is_fertile());
        let t = vec![q(&[1]), q(&[-1, 0, 0, 1])];
        let sq = FertileTuple::new(vec![q(&[0, 0, 1])], t.clone(), vec![]);
        assert!(!sq.fertility().entries[0].square_free);
        let bad = FertileTuple::new(vec![q(&[-1, 1])], t, vec![]);
        let r = bad.fertility();
        assert!(!r.entries[0].avoids_s);
        assert!(!r.is_fertile());
    }

    #[test]
    fn cube_example_mutation_and_space() {
        let t = example_tuple();
        let m = mutate(&t, 1).unwrap();
        assert_eq!(m.y_new, q(&[2, 0, 0, 1]));
        assert_eq!(m.c, 0);
        let s = build_space(&t).unwrap();
        assert_eq!(s.basis, vec![q(&[0, 1]), q(&[2, 0, 0, 1])]);
        assert_eq!(s.kappa[2], Rational::from_int(2));
        assert_eq!(s.finite[0].measured[1], vec![0, 2]);
        assert_eq!(s.infinity.measured[1], vec![1, 3]);
        assert_eq!(s.infinity.predicted, vec![1, 3]);
        let qw = q_witness(&s, 1).unwrap();
        assert_eq!(qw, Poly::new(vec![Rational::from_int(1), Rational::from_int(0), Rational::from_int(0), Rational::new(1.into(), 2.into())]));
        assert_eq!(theta_with(&s.basis, &s.k).unwrap(), vec![q(&[0, 1])]);
    }

    #[test]
    fn cube_example_over_cyclotomic_field() {
        let ext = make_extension(&q(&[1, 1, 1]), "a", &[], None).unwrap();
        let w = ExtElem::generator(&ext);
        let lift = |p: Poly<Rational>| p.map(|c| ExtElem::rational(c.clone()));
        let pts = vec![ExtElem::from_int(1), w.clone(), w.clone() * w];
        let t = FertileTuple::new(vec![lift(q(&[0, 1]))], vec![lift(q(&[1])), lift(q(&[-1, 0, 0, 1]))], pts);
        let s = build_space(&t).unwrap();
        assert_eq!(s.basis[1], lift(q(&[2, 0, 0, 1])));
        assert!(s.finite.iter().all(|tab| tab.measured[1] == vec![0, 2]));
    }

    #[test]
    fn trivial_tuple_is_unramified() {
        let t = FertileTuple::trivial(vec![q(&[1]); 3], vec![]);
        let s = build_space(&t).unwrap();
        for (i, row) in s.infinity.measured.iter().enumerate() {
            assert_eq!(*row, (0..=i).collect::<Vec<_>>());
        }
        for i in 1..=2 {
            q_witness(&s, i).unwrap();
        }
    }

    #[test]
    fn mutation_in_each_direction_stays_fertile() {
        // N = 2 with ramification at 0 and 1
        let t = FertileTuple::trivial(vec![q(&[0, 1]), q(&[-1, 1]), q(&[1])], vec![Rational::from_int(0), Rational::from_int(1)]);
        let m1 = mutate(&t, 1).unwrap();
        let m2 = mutate(&m1.tuple, 2).unwrap();
        assert!(m2.tuple.is_fertile());
        let s = build_space(&m2.tuple).unwrap();
        for i in 1..=2 {
            q_witness(&s, i).unwrap();
        }
        assert_eq!(theta_with(&s.basis, &s.k).unwrap(), m2.tuple.y);
    }
}
