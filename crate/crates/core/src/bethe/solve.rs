use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{MasterData, Point};
use crate::multiplicity::{clear_denominators, MultiPoly};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub starts: usize,
    pub seed: u64,
    /// Residual norm below which a point counts as critical.
    pub tol: f64,
    pub max_iter: usize,
    pub dedup_radius: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            starts: 200,
            seed: 0,
            tol: 1e-12,
            max_iter: 200,
            dedup_radius: 1e-6,
        }
    }
}

/// A critical point up to the action permuting coordinates within a level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalOrbit {
    /// Canonical representative: each level sorted by (re, im).
    pub point: Point<Complex64>,
    pub residual: f64,
    /// Number of starts that converged to this orbit.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub orbits: Vec<CriticalOrbit>,
    pub converged: usize,
    pub diverged: usize,
    pub stalled: usize,
}

enum Run {
    Converged(Point<Complex64>, f64),
    Diverged,
    Stalled,
}

pub fn canonicalize(point: &Point<Complex64>) -> Point<Complex64> {
    point
        .iter()
        .map(|level| {
            let mut v = level.clone();
            v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            v
        })
        .collect()
}

fn level_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    fn best(a: &[Complex64], b: &[Complex64], used: &mut Vec<bool>, j: usize, cur: f64, acc: &mut f64) {
        if cur >= *acc {
            return;
        }
        if j == a.len() {
            *acc = cur;
            return;
        }
        for k in 0..b.len() {
            if !used[k] {
                used[k] = true;
                best(a, b, used, j + 1, cur.max((a[j] - b[k]).norm()), acc);
                used[k] = false;
            }
        }
    }
    let sorted = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if a.len() > 7 {
        return sorted;
    }
    let mut acc = sorted;
    best(a, b, &mut vec![false; b.len()], 0, 0.0, &mut acc);
    acc
}

/// Distance between orbits: the largest per-level distance, each minimized
/// over permutations within the level.
pub fn orbit_distance(a: &Point<Complex64>, b: &Point<Complex64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| level_distance(x, y))
        .fold(0.0, f64::max)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn residual_norm(data: &MasterData<Complex64>, flat: &[Complex64]) -> Option<f64> {
    let r = data.residual(&data.unflatten(flat)).ok()?;
    let n = norm(&r);
    n.is_finite().then_some(n)
}

/// The critical point equations with denominators cleared. Unlike the
/// residual, which decays like `1/t` at infinity and so sends Newton
/// outward from far starts, these grow at infinity.
struct Cleared {
    polys: Vec<MultiPoly<Complex64>>,
    jac: Vec<Vec<MultiPoly<Complex64>>>,
}

impl Cleared {
    fn new(data: &MasterData<Complex64>) -> Self {
        let polys = clear_denominators(data).polys;
        let n = data.num_vars();
        let jac = polys.iter().map(|p| (0..n).map(|j| p.partial(j)).collect()).collect();
        Cleared { polys, jac }
    }

    fn value(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.polys.iter().map(|p| p.eval(x)).collect()
    }

    fn merit(&self, x: &[Complex64]) -> Option<f64> {
        let n = norm(&self.value(x));
        n.is_finite().then_some(n)
    }

    /// Truncated pseudo-inverse steps `J^+ G`, one per relative cutoff on
    /// the singular values; larger cutoffs keep the step bounded near
    /// positive-dimensional solution sets.
    fn steps(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        let n = x.len();
        let j = DMatrix::from_fn(n, n, |r, c| self.jac[r][c].eval(x));
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        if !smax.is_finite() || smax == 0.0 {
            return Vec::new();
        }
        let rhs = DVector::from_vec(self.value(x));
        CUTOFFS
            .iter()
            .filter_map(|&eps| svd.solve(&rhs, eps * smax).ok())
            .map(|s| s.iter().copied().collect())
            .collect()
    }
}

const CUTOFFS: [f64; 3] = [1e-12, 1e-6, 1e-3];

fn escaped(x: &[Complex64], radius: f64) -> bool {
    x.iter().any(|c| !c.is_finite() || c.norm() > 1e3 * radius)
}

/// Undamped Newton; `None` when the iterate escapes.
fn plain_newton(sys: &Cleared, mut x: Vec<Complex64>, max_iter: usize, radius: f64) -> Option<Vec<Complex64>> {
    for _ in 0..max_iter {
        let steps = sys.steps(&x);
        let s = steps.first()?;
        x = x.iter().zip(s).map(|(a, b)| a - b).collect();
        if escaped(&x, radius) {
            return None;
        }
        if norm(s) <= 1e-15 * (1.0 + norm(&x)) {
            break;
        }
    }
    Some(x)
}

/// Newton with backtracking on `|G|`, trying every truncation level, and
/// step rescaling at multiple roots.
fn damped_newton(sys: &Cleared, start: Vec<Complex64>, max_iter: usize, radius: f64) -> Option<Vec<Complex64>> {
    let mut x = start;
    let mut fx = sys.merit(&x)?;
    let mut prev_step = f64::NAN;
    let mut prev_ratio = f64::NAN;
    for _ in 0..max_iter {
        if fx == 0.0 {
            break;
        }
        let steps = sys.steps(&x);
        let Some(full) = steps.first() else { break };
        let snorm = norm(full);
        let xnorm = norm(&x);
        let mut best: Option<(Vec<Complex64>, f64, f64)> = None;
        for step in &steps {
            let mut alpha = 1.0;
            for _ in 0..12 {
                let cand: Vec<Complex64> = x.iter().zip(step).map(|(a, s)| a - s * alpha).collect();
                if let Some(fc) = sys.merit(&cand) {
                    if fc < fx {
                        if best.as_ref().is_none_or(|(_, fb, _)| fc < *fb) {
                            best = Some((cand, fc, alpha * norm(step)));
                        }
                        break;
                    }
                }
                alpha *= 0.5;
            }
        }
        // linear convergence at a multiple root: ratio of successive steps
        // approaches 1 - 1/m; try the step scaled by m
        let ratio = snorm / prev_step;
        if ratio > 0.3 && ratio < 0.95 && (ratio - prev_ratio).abs() < 0.1 {
            let m = (1.0 / (1.0 - ratio)).round().max(2.0);
            let cand: Vec<Complex64> = x.iter().zip(full).map(|(a, s)| a - s * m).collect();
            if let Some(fc) = sys.merit(&cand) {
                if best.as_ref().is_none_or(|(_, fb, _)| fc < *fb) {
                    best = Some((cand, fc, m * snorm));
                }
            }
        }
        prev_ratio = ratio;
        prev_step = snorm;
        let Some((nx, nf, taken)) = best else { break };
        x = nx;
        fx = nf;
        if escaped(&x, radius) {
            return None;
        }
        if taken <= 1e-15 * (1.0 + xnorm) {
            break;
        }
    }
    Some(x)
}

/// Coordinates closer than this, relative to the start radius, count as
/// colliding; the cleared equations also vanish on some such collisions.
const COLLISION: f64 = 1e-6;

fn classify(data: &MasterData<Complex64>, x: Option<Vec<Complex64>>, opts: &SolveOptions, radius: f64) -> Run {
    let Some(x) = x else { return Run::Diverged };
    let point = data.unflatten(&x);
    if data.admissible(&point, COLLISION * radius).is_err() {
        return Run::Stalled;
    }
    match residual_norm(data, &x) {
        Some(r) if r < opts.tol => Run::Converged(point, r),
        _ => Run::Stalled,
    }
}

/// Plain Newton first (its basins reach further), polished by damped
/// Newton; damped Newton from the start otherwise.
fn run_newton(data: &MasterData<Complex64>, sys: &Cleared, start: Vec<Complex64>, opts: &SolveOptions, radius: f64) -> Run {
    let plain = plain_newton(sys, start.clone(), opts.max_iter, radius)
        .and_then(|x| damped_newton(sys, x, opts.max_iter, radius));
    match classify(data, plain, opts, radius) {
        Run::Converged(p, r) => Run::Converged(p, r),
        first => match classify(data, damped_newton(sys, start, opts.max_iter, radius), opts, radius) {
            Run::Diverged => first,
            other => other,
        },
    }
}

fn draw_start(data: &MasterData<Complex64>, rng: &mut ChaCha8Rng, radius: f64) -> Vec<Complex64> {
    loop {
        let flat: Vec<Complex64> = (0..data.num_vars())
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
            })
            .collect();
        if data.admissible(&data.unflatten(&flat), 1e-9).is_ok() {
            return flat;
        }
    }
}

/// Multi-start Newton on the critical point equations. Output depends only
/// on `(data, opts)`.
pub fn solve_critical(data: &MasterData<Complex64>, opts: &SolveOptions) -> SolveOutcome {
    if data.num_vars() == 0 {
        return SolveOutcome {
            orbits: vec![CriticalOrbit {
                point: vec![Vec::new(); data.n],
                residual: 0.0,
                hits: opts.starts.max(1),
            }],
            converged: opts.starts.max(1),
            diverged: 0,
            stalled: 0,
        };
    }
    let radius = 2.0 * (data.points.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1.0);
    let sys = Cleared::new(data);
    let runs: Vec<Run> = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let start = draw_start(data, &mut rng, radius);
            run_newton(data, &sys, start, opts, radius)
        })
        .collect();
    let mut orbits: Vec<CriticalOrbit> = Vec::new();
    let (mut converged, mut diverged, mut stalled) = (0, 0, 0);
    for run in runs {
        match run {
            Run::Converged(p, res) => {
                converged += 1;
                let p = canonicalize(&p);
                if let Some(o) = orbits
                    .iter_mut()
                    .find(|o| orbit_distance(&o.point, &p) < opts.dedup_radius)
                {
                    o.hits += 1;
                    if res < o.residual {
                        o.point = p;
                        o.residual = res;
                    }
                } else {
                    orbits.push(CriticalOrbit {
                        point: p,
                        residual: res,
                        hits: 1,
                    });
                }
            }
            Run::Diverged => diverged += 1,
            Run::Stalled => stalled += 1,
        }
    }
    orbits.sort_by(|a, b| {
        let fa = a.point.iter().flatten();
        let fb = b.point.iter().flatten();
        for (x, y) in fa.zip(fb) {
            let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    });
    SolveOutcome {
        orbits,
        converged,
        diverged,
        stalled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cube_roots() -> Vec<Complex64> {
        let h = 3f64.sqrt() / 2.0;
        vec![c(1.0), Complex64::new(-0.5, h), Complex64::new(-0.5, -h)]
    }

    #[test]
    fn example_has_one_orbit_at_zero() {
        let data = MasterData::new(1, vec![1], cube_roots(), vec![vec![1]; 3]).unwrap();
        let out = solve_critical(&data, &SolveOptions { starts: 50, ..Default::default() });
        assert_eq!(out.orbits.len(), 1);
        assert!(out.orbits[0].point[0][0].norm() < 1e-8);
    }

    #[test]
    fn rational_variant_has_two_orbits() {
        let data = MasterData::new(1, vec![1], vec![c(0.0), c(1.0), c(-1.0)], vec![vec![1]; 3]).unwrap();
        let out = solve_critical(&data, &SolveOptions { starts: 50, ..Default::default() });
        assert_eq!(out.orbits.len(), 2);
        let s = 1.0 / 3f64.sqrt();
        assert!((out.orbits[0].point[0][0] - c(-s)).norm() < 1e-10);
        assert!((out.orbits[1].point[0][0] - c(s)).norm() < 1e-10);
    }

    #[test]
    fn empty_lengths_give_the_empty_point() {
        let data = MasterData::new(2, vec![0, 0], vec![c(0.0)], vec![vec![1, 0]]).unwrap();
        let out = solve_critical(&data, &SolveOptions::default());
        assert_eq!(out.orbits.len(), 1);
        assert!(out.orbits[0].point.iter().all(|l| l.is_empty()));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let data = MasterData::new(1, vec![2], vec![c(0.0), c(1.0), c(-1.0), c(2.0)], vec![vec![1]; 4]).unwrap();
        let opts = SolveOptions { starts: 40, seed: 7, ..Default::default() };
        assert_eq!(solve_critical(&data, &opts), solve_critical(&data, &opts));
    }

    #[test]
    fn canonical_form_is_idempotent_and_invariant() {
        let p = vec![vec![Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.5), Complex64::new(1.0, -2.0)]];
        let q = canonicalize(&p);
        assert_eq!(canonicalize(&q), q);
        let mut r = p.clone();
        r[0].reverse();
        assert_eq!(canonicalize(&r), q);
        assert_eq!(orbit_distance(&p, &r), 0.0);
    }
}
