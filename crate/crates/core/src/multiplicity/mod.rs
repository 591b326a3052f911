//! Local multiplicity of an isolated solution via the Macaulay dual space:
//! the differential functionals at the point that vanish on the ideal.

mod multipoly;

pub use multipoly::{Monomial, MultiPoly};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bethe::MasterData;
use crate::field::{Complex64, Field, FieldSpec, Rational, Scalar};
use crate::linalg::{null_space, rref};
use crate::poly::Poly;
use crate::text::{parse_expr, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultError {
    #[error("point is not a solution: |f_{index}(p)| = {value:e}")]
    NotASolution { index: usize, value: f64 },
    #[error("dual space still growing at order {0}: solution is not isolated")]
    NotIsolated(usize),
    #[error("point is not a root")]
    NotARoot,
    #[error("point has {got} coordinates, system has {expected} variables")]
    Arity { expected: usize, got: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Polynomials in named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSystem<F> {
    pub vars: Vec<String>,
    pub polys: Vec<MultiPoly<F>>,
}

impl<F: Scalar> MultivariateSystem<F> {
    pub fn parse(vars: &[String], polys: &[String], field: &FieldSpec) -> Result<Self, MultError> {
        let n = vars.len();
        let polys = polys
            .iter()
            .map(|s| {
                let e = parse_expr(s)?;
                let p: MultiPoly<F> = e.eval(&|name: &str| {
                    if let Some(i) = vars.iter().position(|v| v == name) {
                        Some(MultiPoly::var(n, i))
                    } else {
                        F::resolve_symbol(name, field).map(|c| MultiPoly::constant(0, c))
                    }
                })?;
                Ok(p.with_arity(n))
            })
            .collect::<Result<_, MultError>>()?;
        Ok(MultivariateSystem {
            vars: vars.to_vec(),
            polys,
        })
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> MultivariateSystem<G> {
        MultivariateSystem {
            vars: self.vars.clone(),
            polys: self.polys.iter().map(|p| p.map(&f)).collect(),
        }
    }

    pub fn render(&self) -> Vec<String> {
        self.polys.iter().map(|p| p.to_string_with(&self.vars)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultOptions {
    pub max_order: usize,
    /// Relative rank tolerance (numeric mode).
    pub tol: f64,
    /// Relative residual allowed at the point (numeric mode).
    pub point_tol: f64,
    /// Random hyperplanes cut before the first attempt, for points already
    /// known to lie on a positive-dimensional set.
    pub slices: usize,
}

impl Default for MultOptions {
    fn default() -> Self {
        MultOptions {
            max_order: 20,
            tol: 1e-8,
            point_tol: 1e-8,
            slices: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityResult {
    pub multiplicity: usize,
    /// `dim D_0, dim D_1, ...` up to the first repeat.
    pub trace: Vec<usize>,
    pub order: usize,
    pub mode: Mode,
    pub tol: f64,
    /// Random hyperplanes added through the point before it was isolated.
    pub slices: usize,
}

type Functional<F> = BTreeMap<Monomial, F>;

fn apply<F: Scalar>(phi: &Functional<F>, g: &MultiPoly<F>) -> F {
    phi.iter()
        .fold(F::zero(), |s, (a, c)| s + c.clone() * g.coeff(a))
}

/// `int_j`: raise the j-th exponent, keeping only terms with no earlier
/// variables.
fn integrate<F: Scalar>(phi: &Functional<F>, j: usize) -> Functional<F> {
    phi.iter()
        .filter(|(a, _)| a[..j].iter().all(|&k| k == 0))
        .map(|(a, c)| {
            let mut b = a.clone();
            b[j] += 1;
            (b, c.clone())
        })
        .collect()
}

/// `Phi_j`: lower the j-th exponent, dropping terms where it is zero.
fn lower<F: Scalar>(phi: &Functional<F>, j: usize) -> Functional<F> {
    phi.iter()
        .filter(|(a, _)| a[j] > 0)
        .map(|(a, c)| {
            let mut b = a.clone();
            b[j] -= 1;
            (b, c.clone())
        })
        .collect()
}

fn normalize_row<F: Field>(row: &mut [F]) {
    if F::is_exact() {
        return;
    }
    let m = row.iter().map(|x| x.magnitude()).fold(0.0, f64::max);
    if m > 0.0 {
        let inv = F::from_rational(&Rational::from_float(1.0 / m).expect("finite"));
        for x in row.iter_mut() {
            *x = x.clone() * inv.clone();
        }
    }
}

fn negligible_row<F: Scalar>(row: &[F], tol: f64) -> bool {
    row.iter().all(|x| x.is_negligible(tol))
}

/// Dual basis in reduced echelon form over an explicit monomial index.
struct DualBasis<F> {
    cols: Vec<Monomial>,
    rows: Vec<Vec<F>>,
    pivots: Vec<usize>,
}

impl<F: Field> DualBasis<F> {
    fn from_functionals(funcs: &[Functional<F>], tol: f64) -> Self {
        let mut cols: Vec<Monomial> = funcs.iter().flat_map(|f| f.keys().cloned()).collect();
        cols.sort();
        cols.dedup();
        let mut rows: Vec<Vec<F>> = funcs
            .iter()
            .map(|f| {
                let mut r: Vec<F> = cols.iter().map(|m| f.get(m).cloned().unwrap_or_else(F::zero)).collect();
                normalize_row(&mut r);
                r
            })
            .collect();
        let pivots = rref(&mut rows, cols.len(), tol);
        rows.truncate(pivots.len());
        DualBasis { cols, rows, pivots }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn functionals(&self) -> Vec<Functional<F>> {
        self.rows
            .iter()
            .map(|r| {
                self.cols
                    .iter()
                    .zip(r)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(m, c)| (m.clone(), c.clone()))
                    .collect()
            })
            .collect()
    }

    /// `v` minus its echelon combination: zero iff `v` lies in the span.
    /// Entries at most `tol` are dropped.
    fn reduce(&self, v: &Functional<F>, tol: f64) -> Functional<F> {
        let mut out = v.clone();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let coef = out.get(&self.cols[pc]).cloned().unwrap_or_else(F::zero);
            if coef.is_zero() {
                continue;
            }
            for (m, c) in self.cols.iter().zip(row) {
                if c.is_zero() {
                    continue;
                }
                let cur = out.get(m).cloned().unwrap_or_else(F::zero);
                out.insert(m.clone(), cur - coef.clone() * c.clone());
            }
            out.remove(&self.cols[pc]);
        }
        out.retain(|_, c| !c.is_negligible(tol));
        out
    }
}

fn check_point<F: Field>(system: &[MultiPoly<F>], point: &[F], nvars: usize, opts: &MultOptions) -> Result<(), MultError> {
    if point.len() != nvars {
        return Err(MultError::Arity {
            expected: nvars,
            got: point.len(),
        });
    }
    for (i, f) in system.iter().enumerate() {
        let v = f.eval(point);
        let ok = if F::is_exact() {
            v.is_zero()
        } else {
            let scale = f.terms().map(|(_, c)| c.magnitude()).fold(1.0, f64::max);
            v.magnitude() <= opts.point_tol * scale
        };
        if !ok {
            return Err(MultError::NotASolution {
                index: i + 1,
                value: v.magnitude(),
            });
        }
    }
    Ok(())
}

/// Dimension of the local algebra of `system` at `point`.
pub fn local_multiplicity<F: Field>(
    system: &MultivariateSystem<F>,
    point: &[F],
    opts: &MultOptions,
) -> Result<MultiplicityResult, MultError> {
    let n = system.vars.len();
    check_point(&system.polys, point, n, opts)?;
    let mode = if F::is_exact() { Mode::Exact } else { Mode::Numeric };
    let tol = if F::is_exact() { 0.0 } else { opts.tol };
    let shifted: Vec<MultiPoly<F>> = system
        .polys
        .iter()
        .map(|f| {
            let g = f.translate(point);
            if F::is_exact() {
                return g;
            }
            let m = g.terms().map(|(_, c)| c.magnitude()).fold(0.0, f64::max);
            if m > 0.0 {
                g.scale(&F::from_rational(&Rational::from_float(1.0 / m).expect("finite")))
            } else {
                g
            }
        })
        .collect();
    let mut dual = DualBasis::from_functionals(&[BTreeMap::from([(vec![0; n], F::one())])], tol);
    let mut trace = vec![1];
    for k in 1..=opts.max_order {
        let prev = dual.functionals();
        let cands: Vec<Functional<F>> = (0..n)
            .flat_map(|j| prev.iter().map(move |phi| integrate(phi, j)))
            .collect();
        let m = cands.len();
        let mut rows: Vec<Vec<F>> = Vec::new();
        for g in &shifted {
            let r: Vec<F> = cands.iter().map(|c| apply(c, g)).collect();
            if !negligible_row(&r, tol) {
                rows.push(r);
            }
        }
        for j in 0..n {
            let reduced: Vec<Functional<F>> = cands
                .iter()
                .map(|c| dual.reduce(&lower(c, j), tol))
                .collect();
            let mut monos: Vec<&Monomial> = reduced.iter().flat_map(|r| r.keys()).collect();
            monos.sort();
            monos.dedup();
            for mono in monos {
                let r: Vec<F> = reduced
                    .iter()
                    .map(|red| red.get(mono).cloned().unwrap_or_else(F::zero))
                    .collect();
                if !negligible_row(&r, tol) {
                    rows.push(r);
                }
            }
        }
        let kernel = null_space(&rows, m, tol);
        let mut funcs = prev;
        for v in kernel {
            let mut f: Functional<F> = BTreeMap::new();
            for (lam, c) in v.iter().zip(&cands) {
                if lam.is_zero() {
                    continue;
                }
                for (mono, x) in c {
                    let cur = f.get(mono).cloned().unwrap_or_else(F::zero);
                    f.insert(mono.clone(), cur + lam.clone() * x.clone());
                }
            }
            funcs.push(f);
        }
        let next = DualBasis::from_functionals(&funcs, tol);
        let grew = next.dim() > dual.dim();
        trace.push(next.dim());
        dual = next;
        if !grew {
            return Ok(MultiplicityResult {
                multiplicity: dual.dim(),
                trace,
                order: k,
                mode,
                tol,
                slices: 0,
            });
        }
    }
    Err(MultError::NotIsolated(opts.max_order))
}

/// Draws slicing coefficients; exact fields get small rationals.
pub trait SliceCoeff: Field {
    fn random(rng: &mut ChaCha8Rng) -> Self;
}

impl SliceCoeff for Rational {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Rational::new(rng.random_range(-20i64..=20).into(), rng.random_range(1i64..=7).into())
    }
}

impl SliceCoeff for Complex64 {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }
}

impl SliceCoeff for crate::field::ExtElem {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        crate::field::ExtElem::rational(Rational::random(rng))
    }
}

/// Like [`local_multiplicity`], but on a positive-dimensional component
/// adds random hyperplanes through the point until it becomes isolated;
/// the count of hyperplanes is the local dimension.
pub fn sliced_multiplicity<F: SliceCoeff>(
    system: &MultivariateSystem<F>,
    point: &[F],
    opts: &MultOptions,
    seed: u64,
) -> Result<MultiplicityResult, MultError> {
    let n = system.vars.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hyperplane = || {
        let mut h = MultiPoly::zero(n);
        for (i, p) in point.iter().enumerate() {
            let c = F::random(&mut rng);
            let lin = &MultiPoly::var(n, i) - &MultiPoly::constant(n, p.clone());
            h = &h + &lin.scale(&c);
        }
        h
    };
    let mut sys = system.clone();
    let first = opts.slices.min(n);
    for _ in 0..first {
        sys.polys.push(hyperplane());
    }
    for slices in first..=n {
        match local_multiplicity(&sys, point, opts) {
            Ok(mut r) => {
                r.slices = slices;
                return Ok(r);
            }
            Err(MultError::NotIsolated(_)) if slices < n => sys.polys.push(hyperplane()),
            Err(e) => return Err(e),
        }
    }
    Err(MultError::NotIsolated(opts.max_order))
}

pub fn univariate_multiplicity<F: Field>(f: &Poly<F>, p: &F) -> Result<usize, MultError> {
    if f.is_zero() || !f.eval(p).is_zero() {
        return Err(MultError::NotARoot);
    }
    f.ord_at(p).map_err(|_| MultError::NotARoot)
}

/// Critical point equations with denominators cleared: equation `(i, j)` is
/// the residual times `-T_i(t_j) prod (t_j - t_k)` over every other
/// coordinate it couples to.
pub fn clear_denominators<F: Field>(data: &MasterData<F>) -> MultivariateSystem<F> {
    let nv = data.num_vars();
    let mut vars = Vec::with_capacity(nv);
    let mut offsets = Vec::with_capacity(data.n);
    for (i, &li) in data.l.iter().enumerate() {
        offsets.push(vars.len());
        for j in 0..li {
            vars.push(format!("t{}_{}", i + 1, j + 1));
        }
    }
    let var = |i: usize, j: usize| MultiPoly::<F>::var(nv, offsets[i] + j);
    let mut polys = Vec::with_capacity(nv);
    for i in 0..data.n {
        for j in 0..data.l[i] {
            let tj = var(i, j);
            let mut factors: Vec<(i64, MultiPoly<F>)> = Vec::new();
            for k in (0..data.l[i]).filter(|&k| k != j) {
                factors.push((2, &tj - &var(i, k)));
            }
            for adj in [i.checked_sub(1), Some(i + 1)].into_iter().flatten() {
                if adj < data.n {
                    for k in 0..data.l[adj] {
                        factors.push((-1, &tj - &var(adj, k)));
                    }
                }
            }
            let t_at = MultiPoly::compose(&data.t[i], &tj);
            let dt_at = MultiPoly::compose(&data.t[i].derivative(), &tj);
            let prod_except = |skip: Option<usize>| {
                factors
                    .iter()
                    .enumerate()
                    .filter(|(m, _)| Some(*m) != skip)
                    .fold(MultiPoly::constant(nv, F::one()), |acc, (_, (_, f))| &acc * f)
            };
            let mut e = &dt_at * &prod_except(None);
            for (m, (coef, _)) in factors.iter().enumerate() {
                e = &e - &(&t_at * &prod_except(Some(m))).scale(&F::from_int(*coef));
            }
            polys.push(e);
        }
    }
    MultivariateSystem { vars, polys }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn sys(vars: &[&str], polys: &[&str]) -> MultivariateSystem<Rational> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let polys: Vec<String> = polys.iter().map(|s| s.to_string()).collect();
        MultivariateSystem::parse(&vars, &polys, &FieldSpec::Rational).unwrap()
    }

    #[test]
    fn double_point() {
        let res = local_multiplicity(&sys(&["t"], &["3t^2"]), &[r(0)], &MultOptions::default()).unwrap();
        assert_eq!(res.multiplicity, 2);
        assert_eq!(res.trace, vec![1, 2, 2]);
    }

    #[test]
    fn fat_point_in_the_plane() {
        let s = sys(&["x", "y"], &["x^2", "x*y", "y^2"]);
        let res = local_multiplicity(&s, &[r(0), r(0)], &MultOptions::default()).unwrap();
        assert_eq!(res.multiplicity, 3);
    }

    #[test]
    fn simple_root_and_errors() {
        let res = local_multiplicity(&sys(&["t"], &["t"]), &[r(0)], &MultOptions::default()).unwrap();
        assert_eq!(res.multiplicity, 1);
        assert!(matches!(
            local_multiplicity(&sys(&["t"], &["t"]), &[r(1)], &MultOptions::default()),
            Err(MultError::NotASolution { .. })
        ));
        assert!(matches!(
            local_multiplicity(&sys(&["x", "y"], &["x*y"]), &[r(0), r(0)], &MultOptions::default()),
            Err(MultError::NotIsolated(20))
        ));
    }

    #[test]
    fn numeric_mode_agrees() {
        let s = sys(&["x", "y"], &["x^2 - y^3", "y*(x - 1) + x^2"]).map(|c| c.to_c64());
        let res = local_multiplicity(&s, &[Complex64::new(0.0, 0.0); 2], &MultOptions::default()).unwrap();
        let exact = local_multiplicity(&sys(&["x", "y"], &["x^2 - y^3", "y*(x - 1) + x^2"]), &[r(0), r(0)], &MultOptions::default()).unwrap();
        assert_eq!(res.multiplicity, exact.multiplicity);
        assert_eq!(res.mode, Mode::Numeric);
    }

    #[test]
    fn slicing_a_line() {
        let s = sys(&["x", "y"], &["x*y"]);
        let res = sliced_multiplicity(&s, &[r(1), r(0)], &MultOptions::default(), 3).unwrap();
        assert_eq!((res.multiplicity, res.slices), (1, 1));
        let s = sys(&["x", "y"], &["y^2"]);
        let res = sliced_multiplicity(&s, &[r(2), r(0)], &MultOptions::default(), 3).unwrap();
        assert_eq!((res.multiplicity, res.slices), (2, 1));
    }

    #[test]
    fn cleared_equations() {
        let data = MasterData::new(1, vec![1], vec![r(0), r(1), r(-1)], vec![vec![1]; 3]).unwrap();
        let s = clear_denominators(&data);
        assert_eq!(s.render(), vec!["3*t1_1^2 - 1".to_string()]);
        let empty = MasterData::new(1, vec![0], vec![r(0)], vec![vec![1]]).unwrap();
        assert!(clear_denominators(&empty).polys.is_empty());
    }

    #[test]
    fn cleared_equations_vanish_with_the_residual() {
        // N = 2, lengths (2, 1): compare at a sample point
        let data = MasterData::new(2, vec![2, 1], vec![r(0), r(1)], vec![vec![1, 0], vec![0, 1]]).unwrap();
        let s = clear_denominators(&data);
        let pt = vec![r(3), r(-2), r(5)];
        let res = data.residual(&data.unflatten(&pt)).unwrap();
        let denoms = [
            // -T_1(3) (3 - (-2)) (3 - 5)
            -(r(3)) * (r(3) - r(-2)) * (r(3) - r(5)),
            -(r(-2)) * (r(-2) - r(3)) * (r(-2) - r(5)),
            -(r(5) - r(1)) * (r(5) - r(3)) * (r(5) - r(-2)),
        ];
        for k in 0..3 {
            assert_eq!(s.polys[k].eval(&pt), res[k].clone() * denoms[k].clone(), "equation {}", k);
        }
    }

    proptest! {
        #[test]
        fn agrees_with_univariate_order(roots in prop::collection::vec((-3i64..=3, 1usize..=3), 1..=3), c in 1i64..5) {
            let mut f = Poly::constant(r(c));
            for (z, m) in &roots {
                f = &f * &Poly::linear(r(*z)).pow(*m as u32);
            }
            let coeffs: Vec<(Monomial, Rational)> = f.coeffs().iter().enumerate().map(|(k, v)| (vec![k as u32], v.clone())).collect();
            let s = MultivariateSystem { vars: vec!["t".into()], polys: vec![MultiPoly::from_terms(1, coeffs)] };
            let (z, _) = roots[0];
            let local = local_multiplicity(&s, &[r(z)], &MultOptions::default()).unwrap().multiplicity;
            prop_assert_eq!(local, univariate_multiplicity(&f, &r(z)).unwrap());
        }
    }
}
