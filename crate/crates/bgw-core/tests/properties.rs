//! Property tests for the algebra layer: ring axioms, window soundness of the
//! series product, grading of the time algebra, and the Leibniz rule of the
//! total derivative.

use bgw_core::diffpoly::{DiffPoly, Param};
use bgw_core::laurent::LaurentSeries;
use bgw_core::multiseries::geometric_denominator;
use bgw_core::nupoly::NuPoly;
use bgw_core::rational::{is_normalized, rat, Rat};
use bgw_core::timepoly::{TimeMono, TimePoly};
use proptest::prelude::*;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=24).prop_map(|(p, q)| rat(p, q))
}

fn arb_nupoly() -> impl Strategy<Value = NuPoly> {
    proptest::collection::vec((0u32..5, arb_rat()), 0..4).prop_map(NuPoly::from_coeffs)
}

fn arb_timepoly() -> impl Strategy<Value = TimePoly> {
    proptest::collection::vec(
        (proptest::collection::vec(0u16..3, 0..3), arb_nupoly()),
        0..4,
    )
    .prop_map(|terms| {
        let mut p = TimePoly::zero();
        for (exps, c) in terms {
            p.add_term(TimeMono::from_exponents(&exps), c);
        }
        p
    })
}

fn arb_diffpoly() -> impl Strategy<Value = DiffPoly> {
    proptest::collection::vec(
        (
            proptest::collection::vec(0u32..3, 0..3),
            (0i32..3, arb_rat()),
        ),
        0..4,
    )
    .prop_map(|terms| {
        let mut p = DiffPoly::zero();
        for (pows, (wexp, c)) in terms {
            let mut mono = bgw_core::diffpoly::DMono::unit();
            for (k, &pow) in pows.iter().enumerate() {
                for _ in 0..pow {
                    mono = mono.mul(&bgw_core::diffpoly::DMono::u_deriv(k));
                }
            }
            p.add_term(mono, Param::monomial([wexp, 0, 0, 0], c));
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_normalization_idempotent(p in -200i64..200, q in 1i64..200) {
        let r = rat(p, q);
        prop_assert!(is_normalized(&r));
        // renormalizing the stored representation changes nothing
        let again = Rat::new(r.numer().clone(), r.denom().clone());
        prop_assert_eq!(&again, &r);
        prop_assert!(is_normalized(&again));
    }

    #[test]
    fn nupoly_ring_axioms(a in arb_nupoly(), b in arb_nupoly(), c in arb_nupoly()) {
        prop_assert_eq!(&(&a * &b), &(&b * &a));
        prop_assert_eq!(&(&a * &(&b * &c)), &(&(&a * &b) * &c));
        prop_assert_eq!(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)));
        prop_assert_eq!(&(&a + &b), &(&b + &a));
    }

    #[test]
    fn timepoly_ring_axioms(a in arb_timepoly(), b in arb_timepoly(), c in arb_timepoly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.mul(&c)), a.mul(&b).mul(&c));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn timepoly_grading(a in arb_timepoly(), b in arb_timepoly(), ell in 0usize..3) {
        // products add levels
        let p = a.mul(&b);
        if !p.is_zero() && !a.is_zero() && !b.is_zero() {
            prop_assert!(p.max_level() <= a.max_level() + b.max_level());
        }
        // d/dt_ell lowers every monomial level by exactly 2 ell + 1
        let d = a.deriv(ell);
        for (mono, _) in d.terms() {
            let raised = mono.bump(ell);
            prop_assert_eq!(raised.level(), mono.level() + 2 * ell as u64 + 1);
            prop_assert!(!a.coefficient(&raised).is_zero());
        }
    }

    #[test]
    fn series_mul_window_soundness(
        coeffs_a in proptest::collection::vec(arb_rat(), 6),
        coeffs_b in proptest::collection::vec(arb_rat(), 6),
        lo_a in -5i64..=-2,
        lo_b in -5i64..=-2,
    ) {
        // truncations of fixed underlying series; every coefficient inside
        // the product window must match the wider recomputation
        let build = |coeffs: &[Rat], lo: i64| {
            LaurentSeries::truncated(
                0,
                coeffs.iter().enumerate().filter_map(|(i, c)| {
                    let e = 1 - i as i64;
                    (e >= lo).then(|| (e, NuPoly::constant(c.clone())))
                }),
                lo,
                1,
            )
        };
        let narrow = build(&coeffs_a, lo_a).checked_mul(&build(&coeffs_b, lo_b)).unwrap();
        let wide = build(&coeffs_a, -5).checked_mul(&build(&coeffs_b, -5)).unwrap();
        let (lo, hi) = narrow.window();
        for e in lo..=hi {
            prop_assert_eq!(narrow.coeff(e).unwrap(), wide.coeff(e).unwrap());
        }
    }

    #[test]
    fn geometric_denominator_total_degree(a in 0usize..3, b in 0usize..3, order in 0i64..8) {
        prop_assume!(a != b);
        let g = geometric_denominator(3, a, b, order).unwrap();
        for (exps, _) in g.terms() {
            prop_assert_eq!(exps.iter().sum::<i64>(), -1);
        }
    }

    #[test]
    fn total_derivative_is_a_derivation(p in arb_diffpoly(), q in arb_diffpoly()) {
        let lhs = p.mul(&q).total_derivative();
        let rhs = p.total_derivative().mul(&q).add(&p.mul(&q.total_derivative()));
        prop_assert_eq!(format!("{:?}", lhs), format!("{:?}", rhs));
    }
}
