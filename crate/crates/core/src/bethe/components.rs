//! Floating-point reproduction, used to tell which critical points lie on
//! the same component: points giving the same space `V` are grouped.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{gamma, CriticalOrbit};
use crate::poly::{wronskian, Poly};

/// Orbits whose reconstructed spaces agree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    /// Index of the orbit with the smallest residual.
    pub representative: usize,
    pub members: Vec<usize>,
    #[serde(skip)]
    pub basis: Vec<Poly<Complex64>>,
}

fn trim(p: &Poly<Complex64>, rel: f64) -> Poly<Complex64> {
    let scale = p.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let keep = p
        .coeffs()
        .iter()
        .rposition(|c| c.norm() > rel * scale)
        .map_or(0, |k| k + 1);
    Poly::new(p.coeffs()[..keep].to_vec())
}

fn monic(p: &Poly<Complex64>) -> Option<Poly<Complex64>> {
    let p = trim(p, 1e-9);
    if p.is_zero() {
        return None;
    }
    let lead = p.leading();
    Some(Poly::new(p.coeffs().iter().map(|c| c / lead).collect()))
}

/// Minimum-norm solution of `Wr(y, u) = rhs` by least squares.
fn solve_wronskian(y: &Poly<Complex64>, rhs: &Poly<Complex64>) -> Option<Poly<Complex64>> {
    let dy = y.deg();
    let deg_u = (rhs.deg() + 1).saturating_sub(dy).max(dy);
    let rows = dy + deg_u + 1;
    let cols = deg_u + 1;
    let mut a = DMatrix::<Complex64>::zeros(rows, cols);
    for k in 0..cols {
        let w = wronskian(&[y.clone(), Poly::monomial(Complex64::new(1.0, 0.0), k)]);
        for (r, c) in w.coeffs().iter().enumerate() {
            a[(r, k)] = *c;
        }
    }
    let mut b = DVector::<Complex64>::zeros(rows);
    for (r, c) in rhs.coeffs().iter().enumerate() {
        if r >= rows {
            return None;
        }
        b[r] = *c;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let u = svd.solve(&b, 1e-12 * smax).ok()?;
    let err = (&a * &u - &b).norm();
    if err > 1e-6 * b.norm().max(1.0) {
        return None;
    }
    Some(Poly::new(u.iter().copied().collect()))
}

/// Floating-point analogue of the reproduction cascade: a basis
/// `u_1..u_{N+1}` of the space attached to `y_1..y_N` and `T_0..T_N`.
pub fn numeric_space(y: &[Poly<Complex64>], t: &[Poly<Complex64>]) -> Option<Vec<Poly<Complex64>>> {
    let n = y.len();
    if t.len() != n + 1 {
        return None;
    }
    let ext = |ys: &[Poly<Complex64>], i: usize| -> Poly<Complex64> {
        if i == 0 || i > n {
            Poly::one()
        } else {
            ys[i - 1].clone()
        }
    };
    let mut basis = vec![&t[0] * &ext(y, 1)];
    for i in 1..=n {
        let mut ys = y.to_vec();
        for j in (1..=i).rev() {
            let rhs = &(&t[j] * &ext(&ys, j - 1)) * &ext(&ys, j + 1);
            let u = solve_wronskian(&ys[j - 1], &rhs)?;
            ys[j - 1] = monic(&u)?;
        }
        basis.push(&t[0] * &ys[0]);
    }
    Some(basis)
}

fn projector(basis: &[Poly<Complex64>], len: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(len, basis.len(), |r, c| basis[c].coeff(r));
    let q = m.qr().q();
    &q * q.adjoint()
}

/// Distance between the spans of two bases, via orthogonal projectors.
pub fn span_distance(a: &[Poly<Complex64>], b: &[Poly<Complex64>]) -> f64 {
    let len = a.iter().chain(b).map(|p| p.coeffs().len()).max().unwrap_or(0);
    if len == 0 || a.len() != b.len() {
        return f64::INFINITY;
    }
    (projector(a, len) - projector(b, len)).norm()
}

/// Groups orbits by the space their tuple reproduces. `t` is `T_0..T_N`.
pub fn group_components(orbits: &[CriticalOrbit], t: &[Poly<Complex64>], radius: f64) -> Vec<Component> {
    let spaces: Vec<Option<Vec<Poly<Complex64>>>> = orbits
        .iter()
        .map(|o| numeric_space(&gamma(&o.point), t))
        .collect();
    let mut comps: Vec<Component> = Vec::new();
    for (k, space) in spaces.iter().enumerate() {
        let found = space.as_ref().and_then(|s| {
            comps
                .iter()
                .position(|c| !c.basis.is_empty() && span_distance(&c.basis, s) < radius)
        });
        match found {
            Some(ci) => {
                let c = &mut comps[ci];
                c.members.push(k);
                if orbits[k].residual < orbits[c.representative].residual {
                    c.representative = k;
                }
            }
            None => comps.push(Component {
                representative: k,
                members: vec![k],
                basis: space.clone().unwrap_or_default(),
            }),
        }
    }
    comps
}
