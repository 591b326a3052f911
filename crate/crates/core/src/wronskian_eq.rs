//! The equation `Wr(y, u) = T` for an unknown polynomial `u`.
//!
//! For square-free `y` a solution exists iff `y | Wr(y', T)`; all solutions
//! then form the line `u0 + c*y`.

use thiserror::Error;

use crate::field::Field;
use crate::poly::{wronskian, Poly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WronskianError {
    #[error("y is not square-free")]
    NotSquareFree,
    #[error("y does not divide Wr(y', T); no polynomial solution")]
    NotSolvable,
    #[error("internal check Wr(y, u) = T failed")]
    VerificationFailed,
    #[error("no admissible member of u + c*y among the first {0} ladder values")]
    ExhaustedLadder(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// All solutions `particular + c * homogeneous`.
#[derive(Debug, Clone, PartialEq)]
pub struct WronskianSolution<F> {
    pub particular: Poly<F>,
    pub homogeneous: Poly<F>,
    /// The particular solution has degree other than `deg T + 1 - deg y`.
    pub cancellation: bool,
}

/// A chosen monic member `(u + c*y) / lead` of the solution family.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized<F> {
    pub poly: Poly<F>,
    pub c: i64,
    /// Leading coefficient of `u + c*y` before scaling.
    pub lead: F,
}

pub const DEFAULT_LADDER: usize = 1000;

fn check_square_free<F: Field>(y: &Poly<F>) -> Result<(), WronskianError> {
    if y.is_zero() {
        return Err(PolyError::ZeroPolynomial.into());
    }
    if !y.is_square_free() {
        return Err(WronskianError::NotSquareFree);
    }
    Ok(())
}

pub fn solvable<F: Field>(y: &Poly<F>, t: &Poly<F>) -> Result<bool, WronskianError> {
    check_square_free(y)?;
    let w = wronskian(&[y.derivative(), t.clone()]);
    let (_, r) = w.div_rem(y)?;
    Ok(r.is_zero())
}

/// Constructs a solution of `Wr(y, u) = T`.
///
/// Writes `T = a*y + b*y'` from a Bezout relation `c*y' + d*y = 1`, then
/// `u = y * integral((a + b') / y) - b`; the quotient is exact precisely in
/// the solvable case.
pub fn solve<F: Field>(y: &Poly<F>, t: &Poly<F>) -> Result<WronskianSolution<F>, WronskianError> {
    check_square_free(y)?;
    let dy = y.derivative();
    let (g, c, d) = dy.gcd_ext(y);
    debug_assert!(g.is_one());
    let a = &d * t;
    let b = &c * t;
    let s = &a + &b.derivative();
    let e = s.exact_div(y).map_err(|_| WronskianError::NotSolvable)?;
    let f = e.antiderivative();
    let u = &(y * &f) - &b;
    if wronskian(&[y.clone(), u.clone()]) != *t {
        return Err(WronskianError::VerificationFailed);
    }
    let expected = (t.deg() + 1).checked_sub(y.deg());
    let cancellation = !t.is_zero() && expected != u.degree();
    Ok(WronskianSolution {
        particular: u,
        homogeneous: y.clone(),
        cancellation,
    })
}

/// The k-th entry of 0, 1, -1, 2, -2, ...
pub fn ladder(k: usize) -> i64 {
    let h = k.div_ceil(2) as i64;
    if k % 2 == 1 {
        h
    } else {
        -h
    }
}

/// Picks the first `c` on the ladder making `u + c*y` square-free, nonzero
/// at every forbidden point and coprime to every polynomial in `avoid`, and
/// returns it scaled monic.
pub fn normalize_generic<F: Field>(
    u: &Poly<F>,
    y: &Poly<F>,
    avoid: &[Poly<F>],
    forbidden: &[F],
    max_candidates: usize,
) -> Result<Normalized<F>, WronskianError> {
    for k in 0..max_candidates {
        let c = ladder(k);
        let cand = u + &y.scale(&F::from_int(c));
        if cand.is_zero() || !cand.is_square_free() {
            continue;
        }
        if forbidden.iter().any(|z| cand.eval(z).is_zero()) {
            continue;
        }
        if avoid.iter().any(|p| !p.is_zero() && !cand.is_coprime(p)) {
            continue;
        }
        let lead = cand.leading();
        let poly = cand.monic()?;
        return Ok(Normalized { poly, c, lead });
    }
    Err(WronskianError::ExhaustedLadder(max_candidates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, Scalar};
    use num_traits::Zero;

    fn q(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&c| Rational::from_int(c)).collect())
    }

    #[test]
    fn divisibility_criterion() {
        assert_eq!(solvable(&q(&[0, 1]), &q(&[-1, 0, 0, 1])), Ok(true));
        assert_eq!(solvable(&q(&[0, 1]), &q(&[0, 1])), Ok(false));
        assert_eq!(solvable(&q(&[0, 1]), &q(&[1])), Ok(true));
        assert_eq!(
            solvable(&q(&[0, 0, 1]), &q(&[1])),
            Err(WronskianError::NotSquareFree)
        );
    }

    #[test]
    fn cube_example_solution() {
        let s = solve(&q(&[0, 1]), &q(&[-1, 0, 0, 1])).unwrap();
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(
            s.particular,
            Poly::new(vec![Rational::from_int(1), Rational::zero(), Rational::zero(), half])
        );
        assert!(!s.cancellation);
        let n = normalize_generic(&s.particular, &s.homogeneous, &[], &[Rational::from_int(1)], 10).unwrap();
        assert_eq!(n.poly, q(&[2, 0, 0, 1]));
        assert_eq!(n.c, 0);
    }

    #[test]
    fn constant_right_hand_side() {
        let s = solve(&q(&[0, 1]), &q(&[1])).unwrap();
        assert_eq!(s.particular, q(&[-1]));
        assert!(matches!(
            solve(&q(&[0, 1]), &q(&[0, 1])),
            Err(WronskianError::NotSolvable)
        ));
    }

    #[test]
    fn ladder_order() {
        let v: Vec<i64> = (0..5).map(ladder).collect();
        assert_eq!(v, vec![0, 1, -1, 2, -2]);
    }

    #[test]
    fn coprimality_moves_off_shared_root() {
        // u = x^2 - 1 shares the root 1 with x - 1; y = x.
        // c = 1: x^2 + x - 1, coprime to x - 1 and square-free.
        let n = normalize_generic(&q(&[-1, 0, 1]), &q(&[0, 1]), &[q(&[-1, 1])], &[], 10).unwrap();
        assert_eq!(n.c, 1);
        assert_eq!(n.poly, q(&[-1, 1, 1]));
    }

    #[test]
    fn degenerate_family_exhausts() {
        // u = y = x^2: every member c'*x^2 has a double root
        let y = q(&[0, 0, 1]);
        assert_eq!(
            normalize_generic(&y, &y, &[], &[], 7),
            Err(WronskianError::ExhaustedLadder(7))
        );
    }
}
