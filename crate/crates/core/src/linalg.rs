//! Row reduction over any [`Field`], exact or floating.

use crate::field::Field;

/// Reduced row echelon form in place. Returns the pivot columns.
///
/// Exact scalars pivot on the first nonzero entry in each column. Floating
/// scalars pivot on the largest entry and treat anything at most
/// `tol * max|entry|` as zero.
pub fn rref<F: Field>(rows: &mut [Vec<F>], ncols: usize, tol: f64) -> Vec<usize> {
    let scale = if F::is_exact() {
        0.0
    } else {
        rows.iter()
            .flat_map(|r| r.iter().map(|x| x.magnitude()))
            .fold(0.0, f64::max)
    };
    let zero_tol = tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let pick = if F::is_exact() {
            (r..rows.len()).find(|&i| !rows[i][c].is_zero())
        } else {
            (r..rows.len())
                .max_by(|&a, &b| rows[a][c].magnitude().total_cmp(&rows[b][c].magnitude()))
                .filter(|&i| rows[i][c].magnitude() > zero_tol)
        };
        let Some(p) = pick else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].inv();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                *x = x.clone() - f.clone() * p.clone();
            }
            if !F::is_exact() {
                row[c] = F::zero();
            }
        }
        pivots.push(c);
        r += 1;
    }
    if !F::is_exact() {
        for row in rows.iter_mut().skip(r) {
            for x in row.iter_mut() {
                *x = F::zero();
            }
        }
    }
    pivots
}

pub fn rank<F: Field>(rows: &[Vec<F>], ncols: usize, tol: f64) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols, tol).len()
}

/// Basis of `{v : M v = 0}`.
pub fn null_space<F: Field>(rows: &[Vec<F>], ncols: usize, tol: f64) -> Vec<Vec<F>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols, tol);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![F::zero(); ncols];
        v[free] = F::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Some solution of `M v = b`, if one exists.
pub fn solve<F: Field>(rows: &[Vec<F>], b: &[F], ncols: usize, tol: f64) -> Option<Vec<F>> {
    let mut aug: Vec<Vec<F>> = rows
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, ncols + 1, tol);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut v = vec![F::zero(); ncols];
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = aug[r][ncols].clone();
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, Scalar};

    fn m(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter()
            .map(|r| r.iter().map(|&x| Rational::from_int(x)).collect())
            .collect()
    }

    #[test]
    fn exact_rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a, 3, 0.0), 2);
        let k = null_space(&a, 3, 0.0);
        assert_eq!(k.len(), 1);
        for row in &a {
            let dot = row
                .iter()
                .zip(&k[0])
                .fold(Rational::from_int(0), |s, (x, y)| s + x * y);
            assert_eq!(dot, Rational::from_int(0));
        }
    }

    #[test]
    fn floating_rank_uses_tolerance() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]];
        assert_eq!(rank(&a, 2, 1e-10), 1);
        assert_eq!(rank(&a, 2, 1e-16), 2);
    }

    #[test]
    fn linear_solve() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let b = [Rational::from_int(3), Rational::from_int(1)];
        assert_eq!(solve(&a, &b, 2, 0.0), Some(vec![Rational::from_int(2), Rational::from_int(1)]));
        let a = m(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve(&a, &b, 2, 0.0), None);
    }
}
