//! Master functions, their critical point equations, sectors, and the
//! translation from master-function data to a basic situation.

mod components;
mod solve;

pub use components::{group_components, numeric_space, span_distance, Component};
pub use solve::{canonicalize, orbit_distance, solve_critical, CriticalOrbit, SolveOptions, SolveOutcome};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::field::{Field, Scalar};
use crate::poly::{wronskian, Poly, PolyError};
use crate::ramification::{
    ram_from_exponents, validate_basic, BasicSituation, ExponentSet, Place, RamError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BetheError {
    #[error("inadmissible point: {0}")]
    Inadmissible(String),
    #[error("sector is empty: l^w_{index} = {value}")]
    EmptySector { index: usize, value: i64 },
    #[error("master function has no critical points: {0}")]
    NoCriticalPoints(String),
    #[error("y_{index} does not divide Wr(y', T y y): remainder norm {norm:e}")]
    NotCertified { index: usize, norm: f64 },
    #[error("invalid data: {0}")]
    BadData(String),
    #[error(transparent)]
    Ram(#[from] RamError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A point `t^(i)_j`, one vector per level `i = 1..N`.
pub type Point<F> = Vec<Vec<F>>;

/// The data of a master function: lengths `l_1..l_N`, marked points and
/// multiplicities `m_s(i)`, with `T_i = prod_s (x - z_s)^{m_s(i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterData<F> {
    pub n: usize,
    pub l: Vec<usize>,
    pub points: Vec<F>,
    /// `mult[s][i-1] = m_s(i)`.
    pub mult: Vec<Vec<usize>>,
    /// `T_1..T_N`.
    pub t: Vec<Poly<F>>,
}

impl<F: Field> MasterData<F> {
    pub fn new(
        n: usize,
        l: Vec<usize>,
        points: Vec<F>,
        mult: Vec<Vec<usize>>,
    ) -> Result<Self, BetheError> {
        if l.len() != n {
            return Err(BetheError::BadData(format!("expected {} lengths, got {}", n, l.len())));
        }
        if mult.len() != points.len() || mult.iter().any(|m| m.len() != n) {
            return Err(BetheError::BadData(format!(
                "each point needs {} multiplicities",
                n
            )));
        }
        for (a, za) in points.iter().enumerate() {
            if points[..a].contains(za) {
                return Err(BetheError::BadData(format!("duplicate point {}", za)));
            }
        }
        let t = (0..n)
            .map(|i| {
                points.iter().zip(&mult).fold(Poly::one(), |acc, (z, m)| {
                    &acc * &Poly::linear(z.clone()).pow(m[i] as u32)
                })
            })
            .collect();
        Ok(MasterData { n, l, points, mult, t })
    }

    /// The master function of a basic situation in the given sector.
    pub fn from_basic(basic: &BasicSituation<F>, sector: &SectorSpec) -> Result<Self, BetheError> {
        let n = basic.n;
        let mult = basic
            .points
            .iter()
            .map(|z| {
                (1..=n)
                    .map(|i| basic.t[i].ord_at(z))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        MasterData::new(n, sector.lengths.clone(), basic.points.clone(), mult)
    }

    pub fn num_vars(&self) -> usize {
        self.l.iter().sum()
    }

    pub fn to_complex(&self) -> MasterData<Complex64> {
        MasterData {
            n: self.n,
            l: self.l.clone(),
            points: self.points.iter().map(|z| z.to_c64()).collect(),
            mult: self.mult.clone(),
            t: self.t.iter().map(|p| p.map(|c| c.to_c64())).collect(),
        }
    }

    /// Splits a flat coordinate vector into levels.
    pub fn unflatten(&self, flat: &[F]) -> Point<F> {
        let mut out = Vec::with_capacity(self.n);
        let mut k = 0;
        for &li in &self.l {
            out.push(flat[k..k + li].to_vec());
            k += li;
        }
        out
    }

    pub fn check_shape(&self, point: &Point<F>) -> Result<(), BetheError> {
        if point.len() != self.n || point.iter().zip(&self.l).any(|(p, &l)| p.len() != l) {
            return Err(BetheError::BadData(format!(
                "point shape does not match lengths {:?}",
                self.l
            )));
        }
        Ok(())
    }

    /// Checks that coordinates within a level are distinct and avoid the
    /// adjacent levels and the marked points. Floating values closer than
    /// `tol` count as equal.
    pub fn admissible(&self, point: &Point<F>, tol: f64) -> Result<(), BetheError> {
        self.check_shape(point)?;
        let close = |a: &F, b: &F| (a.clone() - b.clone()).is_negligible(tol);
        for (i, level) in point.iter().enumerate() {
            for (j, a) in level.iter().enumerate() {
                if level[..j].iter().any(|b| close(a, b)) {
                    return Err(BetheError::Inadmissible(format!(
                        "coordinates of level {} are not distinct",
                        i + 1
                    )));
                }
                if let Some(z) = self.points.iter().find(|z| close(a, z)) {
                    return Err(BetheError::Inadmissible(format!(
                        "t^({})_{} meets the marked point {}",
                        i + 1,
                        j + 1,
                        z
                    )));
                }
                if i + 1 < point.len() && point[i + 1].iter().any(|b| close(a, b)) {
                    return Err(BetheError::Inadmissible(format!(
                        "levels {} and {} intersect",
                        i + 1,
                        i + 2
                    )));
                }
            }
        }
        Ok(())
    }

    /// Gradient of `log Phi`, flattened level by level.
    pub fn residual(&self, point: &Point<F>) -> Result<Vec<F>, BetheError> {
        self.admissible(point, 0.0)?;
        let mut out = Vec::with_capacity(self.num_vars());
        for (i, level) in point.iter().enumerate() {
            for (j, tj) in level.iter().enumerate() {
                let mut r = F::zero();
                for (k, tk) in level.iter().enumerate() {
                    if k != j {
                        r = r + F::from_int(2).div(&(tj.clone() - tk.clone()));
                    }
                }
                for adj in [i.checked_sub(1), Some(i + 1)].into_iter().flatten() {
                    if let Some(other) = point.get(adj) {
                        for tk in other {
                            r = r - (tj.clone() - tk.clone()).inv();
                        }
                    }
                }
                for (z, m) in self.points.iter().zip(&self.mult) {
                    if m[i] > 0 {
                        r = r - F::from_int(m[i] as i64).div(&(tj.clone() - z.clone()));
                    }
                }
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Jacobian of [`MasterData::residual`] (the Hessian of `log Phi`).
    pub fn jacobian(&self, point: &Point<F>) -> Result<Vec<Vec<F>>, BetheError> {
        self.admissible(point, 0.0)?;
        let nv = self.num_vars();
        let offsets: Vec<usize> = self
            .l
            .iter()
            .scan(0, |acc, &l| {
                let o = *acc;
                *acc += l;
                Some(o)
            })
            .collect();
        let mut jac = vec![vec![F::zero(); nv]; nv];
        for (i, level) in point.iter().enumerate() {
            for (j, tj) in level.iter().enumerate() {
                let row = offsets[i] + j;
                let mut diag = F::zero();
                for (k, tk) in level.iter().enumerate() {
                    if k != j {
                        let q = (tj.clone() - tk.clone()).inv();
                        let v = F::from_int(2) * q.clone() * q;
                        jac[row][offsets[i] + k] = v.clone();
                        diag = diag - v;
                    }
                }
                for adj in [i.checked_sub(1), Some(i + 1)].into_iter().flatten() {
                    if let Some(other) = point.get(adj) {
                        for (k, tk) in other.iter().enumerate() {
                            let q = (tj.clone() - tk.clone()).inv();
                            let v = q.clone() * q;
                            jac[row][offsets[adj] + k] = -v.clone();
                            diag = diag + v;
                        }
                    }
                }
                for (z, m) in self.points.iter().zip(&self.mult) {
                    if m[i] > 0 {
                        let q = (tj.clone() - z.clone()).inv();
                        diag = diag + F::from_int(m[i] as i64) * q.clone() * q;
                    }
                }
                jac[row][row] = diag;
            }
        }
        Ok(jac)
    }
}

impl MasterData<Complex64> {
    /// `log |Phi|` at a point.
    pub fn log_abs_master(&self, point: &Point<Complex64>) -> f64 {
        let mut s = 0.0;
        for (i, level) in point.iter().enumerate() {
            for (j, tj) in level.iter().enumerate() {
                for tk in &level[..j] {
                    s += 2.0 * (tj - tk).norm().ln();
                }
                if let Some(next) = point.get(i + 1) {
                    for tk in next {
                        s -= (tj - tk).norm().ln();
                    }
                }
                for (z, m) in self.points.iter().zip(&self.mult) {
                    s -= m[i] as f64 * (tj - z).norm().ln();
                }
            }
        }
        s
    }
}

/// `y_i = prod_j (x - t^(i)_j)`.
pub fn gamma<F: Scalar>(point: &Point<F>) -> Vec<Poly<F>> {
    point.iter().map(|level| Poly::from_roots(level)).collect()
}

/// Remainders of `Wr(y_i', T_i y_{i-1} y_{i+1})` modulo `y_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub exact: bool,
    pub remainder_norms: Vec<f64>,
}

/// Checks `y_i | Wr(y_i', T_i y_{i-1} y_{i+1})` for `i = 1..N`, exactly for
/// exact scalars and up to `tol` relative to the Wronskian's size otherwise.
pub fn certify_divisibility<F: Field>(
    y: &[Poly<F>],
    t: &[Poly<F>],
    tol: f64,
) -> Result<Certificate, BetheError> {
    if y.len() != t.len() {
        return Err(BetheError::BadData(format!(
            "{} polynomials y but {} polynomials T",
            y.len(),
            t.len()
        )));
    }
    let n = y.len();
    let ext = |i: usize| -> Poly<F> {
        if i == 0 || i > n {
            Poly::one()
        } else {
            y[i - 1].clone()
        }
    };
    let mut norms = Vec::with_capacity(n);
    for i in 1..=n {
        let yi = &y[i - 1];
        if !yi.is_monic() {
            return Err(BetheError::BadData(format!("y_{} is not monic", i)));
        }
        let rhs = &(&t[i - 1] * &ext(i - 1)) * &ext(i + 1);
        let w = wronskian(&[yi.derivative(), rhs]);
        let (_, r) = w.div_rem(yi)?;
        let norm = coeff_norm(&r);
        let ok = if F::is_exact() {
            r.is_zero()
        } else {
            norm <= tol * coeff_norm(&w).max(1.0)
        };
        if !ok {
            return Err(BetheError::NotCertified { index: i, norm });
        }
        norms.push(norm);
    }
    Ok(Certificate {
        exact: F::is_exact(),
        remainder_norms: norms,
    })
}

pub(crate) fn coeff_norm<F: Scalar>(p: &Poly<F>) -> f64 {
    p.coeffs()
        .iter()
        .map(|c| c.magnitude().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// A sector: descending exponent labels `c_1 > ... > c_{N+1}` at infinity,
/// a permutation `w` (1-based) and the lengths `l^w_1..l^w_N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectorSpec {
    pub w: Vec<usize>,
    pub c: Vec<usize>,
    pub lengths: Vec<usize>,
}

impl SectorSpec {
    pub fn is_identity(&self) -> bool {
        self.w.iter().enumerate().all(|(i, &v)| v == i + 1)
    }
}

/// `l^w_i = sum_{j<=i} c_{w(j)} - i(i-1)/2 - deg K_i` for `i = 1..N`, where
/// `k_deg[i-1] = deg K_i`.
pub fn sector_lengths(c: &[usize], w: &[usize], k_deg: &[usize]) -> Result<Vec<usize>, BetheError> {
    if c.windows(2).any(|p| p[0] <= p[1]) {
        return Err(BetheError::BadData(format!("labels {:?} are not strictly decreasing", c)));
    }
    let mut seen = vec![false; c.len()];
    if w.len() != c.len()
        || w.iter().any(|&v| v == 0 || v > c.len() || std::mem::replace(&mut seen[v - 1], true))
    {
        return Err(BetheError::BadData(format!("{:?} is not a permutation", w)));
    }
    let n = c.len() - 1;
    if k_deg.len() < n {
        return Err(BetheError::BadData("missing degrees of K_i".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut partial = 0i64;
    for i in 1..=n {
        partial += c[w[i - 1] - 1] as i64;
        let v = partial - (i * (i - 1) / 2) as i64 - k_deg[i - 1] as i64;
        if v < 0 {
            return Err(BetheError::EmptySector { index: i, value: v });
        }
        out.push(v as usize);
    }
    Ok(out)
}

/// Descending exponents of a basic situation at infinity.
pub fn infinity_labels<F: Field>(basic: &BasicSituation<F>) -> Vec<usize> {
    let (d, n) = (basic.d, basic.n);
    (1..=n + 1)
        .map(|k| d + 1 - k - basic.infinity.a(n + 2 - k))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n);
            out.push(q);
        }
    }
    out.sort();
    out
}

pub fn sector<F: Field>(basic: &BasicSituation<F>, w: &[usize]) -> Result<SectorSpec, BetheError> {
    let c = infinity_labels(basic);
    let k_deg: Vec<usize> = basic.k[1..].iter().map(|k| k.deg()).collect();
    let lengths = sector_lengths(&c, w, &k_deg)?;
    Ok(SectorSpec {
        w: w.to_vec(),
        c,
        lengths,
    })
}

pub fn identity_sector<F: Field>(basic: &BasicSituation<F>) -> Result<SectorSpec, BetheError> {
    let w: Vec<usize> = (1..=basic.n + 1).collect();
    sector(basic, &w)
}

/// All non-empty sectors, in lexicographic order of `w`.
pub fn all_sectors<F: Field>(basic: &BasicSituation<F>) -> Vec<SectorSpec> {
    permutations(basic.n + 1)
        .into_iter()
        .filter_map(|w| sector(basic, &w).ok())
        .collect()
}

/// The non-empty sector with the fewest variables; ties go to the
/// lexicographically first `w`.
pub fn smallest_sector<F: Field>(basic: &BasicSituation<F>) -> Result<SectorSpec, BetheError> {
    all_sectors(basic)
        .into_iter()
        .min_by_key(|s| s.lengths.iter().sum::<usize>())
        .ok_or_else(|| BetheError::BadData("every sector is empty".into()))
}

/// Builds the basic situation whose sector `w` carries the given master
/// function.
pub fn translate_master<F: Field>(
    data: &MasterData<F>,
) -> Result<(BasicSituation<F>, SectorSpec), BetheError> {
    let n = data.n;
    let len = |i: usize| -> i64 {
        if i == 0 || i > n {
            0
        } else {
            data.l[i - 1] as i64
        }
    };
    let mut c = Vec::with_capacity(n + 1);
    let mut deg_sum = 0i64;
    for i in 1..=n + 1 {
        let ci = (i as i64 - 1) + len(i) - len(i - 1) + deg_sum;
        if ci < 0 {
            return Err(BetheError::NoCriticalPoints(format!("c_{} = {} is negative", i, ci)));
        }
        if let Some(j) = c.iter().position(|&cj| cj == ci) {
            return Err(BetheError::NoCriticalPoints(format!(
                "c_{} = c_{} = {}",
                j + 1,
                i,
                ci
            )));
        }
        c.push(ci);
        if i <= n {
            deg_sum += data.t[i - 1].deg() as i64;
        }
    }
    let c: Vec<usize> = c.into_iter().map(|v| v as usize).collect();
    let d = *c.iter().max().expect("N + 1 >= 1 labels");
    let points = data
        .points
        .iter()
        .zip(&data.mult)
        .map(|(z, m)| {
            let a = (1..=n + 1)
                .map(|j| (j..=n).map(|l| m[n - l]).sum())
                .collect();
            (z.clone(), a)
        })
        .collect();
    let mut sorted = c.clone();
    sorted.sort_unstable();
    let inf = ram_from_exponents(&ExponentSet(sorted.clone()), d, Place::Infinity)?;
    let basic = validate_basic(d, n, points, inf.entries().to_vec())?;
    let desc: Vec<usize> = sorted.iter().rev().copied().collect();
    let w: Vec<usize> = c
        .iter()
        .map(|ci| desc.iter().position(|x| x == ci).expect("label present") + 1)
        .collect();
    let sec = sector(&basic, &w)?;
    if sec.lengths != data.l {
        return Err(BetheError::BadData(format!(
            "sector lengths {:?} differ from the input {:?}",
            sec.lengths, data.l
        )));
    }
    Ok((basic, sec))
}
