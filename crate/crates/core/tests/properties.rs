use proptest::prelude::*;

use wronski_core::field::{Rational, Scalar};
use wronski_core::poly::{wronskian, Poly};
use wronski_core::reproduction::{build_space, mutate, q_witness, theta_with, FertileTuple};
use wronski_core::wronskian_eq::{solvable, solve};
use wronski_core::QPoly;

fn q(c: &[i64]) -> QPoly {
    Poly::new(c.iter().map(|&v| Rational::from_int(v)).collect())
}

fn poly(max_deg: usize) -> impl Strategy<Value = QPoly> {
    prop::collection::vec(-4i64..=4, 1..=max_deg + 1).prop_map(|c| q(&c))
}

fn square_free(max_deg: usize) -> impl Strategy<Value = QPoly> {
    poly(max_deg).prop_filter("square-free, non-constant", |p| p.deg() >= 1 && p.is_square_free())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wronskian_of_y_and_g_is_solvable(y in square_free(5), g in poly(7)) {
        let t = wronskian(&[y.clone(), g.clone()]);
        prop_assert!(solvable(&y, &t).unwrap());
        let u = solve(&y, &t).unwrap().particular;
        let (quot, rem) = (&u - &g).div_rem(&y).unwrap();
        prop_assert!(rem.is_zero());
        prop_assert!(quot.is_constant());
    }

    #[test]
    fn solve_agrees_with_divisibility(y in square_free(4), t in poly(6)) {
        let ok = solvable(&y, &t).unwrap();
        match solve(&y, &t) {
            Ok(s) => {
                prop_assert!(ok);
                prop_assert_eq!(wronskian(&[y.clone(), s.particular]), t);
            }
            Err(_) => prop_assert!(!ok),
        }
    }

    #[test]
    fn three_term_rule(y in poly(5), p in poly(5), r in poly(5)) {
        let dy = y.derivative();
        let lhs = &(&wronskian(&[dy.clone(), p.clone()]) * &r) - &(&wronskian(&[dy.clone(), r.clone()]) * &p);
        prop_assert_eq!(lhs, &wronskian(&[r, p]) * &dy);
    }

    #[test]
    fn composition_identity(u in prop::collection::vec(poly(4), 2..=4)) {
        let i = u.len() - 1;
        let mut b = u[..i - 1].to_vec();
        b.push(u[i].clone());
        let lhs = wronskian(&[wronskian(&u[..i]), wronskian(&b)]);
        prop_assert_eq!(lhs, &wronskian(&u[..i - 1]) * &wronskian(&u));
    }

    #[test]
    fn reproduced_spaces_give_back_their_tuple(
        n in 1usize..=2,
        roots in prop::collection::vec(prop::collection::vec(-2i64..=2, 0..=2), 3),
        dirs in prop::collection::vec(1usize..=2, 0..=3),
    ) {
        let t: Vec<QPoly> = (0..=n)
            .map(|j| roots[j].iter().fold(q(&[1]), |acc, &z| &acc * &q(&[-z, 1])))
            .collect();
        let points: Vec<Rational> = (-2..=2).map(Rational::from_int).collect();
        let mut tuple = FertileTuple::trivial(t, points);
        for d in dirs.into_iter().filter(|&d| d <= n) {
            if let Ok(m) = mutate(&tuple, d) {
                tuple = m.tuple;
            }
        }
        prop_assume!(tuple.is_fertile());
        let space = build_space(&tuple).unwrap();
        prop_assert!(space.finite.iter().all(|tab| tab.agrees()));
        prop_assert!(space.infinity.agrees());
        for i in 1..=n {
            q_witness(&space, i).unwrap();
        }
        prop_assert_eq!(theta_with(&space.basis, &space.k).unwrap(), tuple.y);
    }
}
