use disperse_lab::dispersive::{aq_norm, dispersive_exponent, herz_bound, Regime};
use disperse_lab::lie_data::RankOneSpace;
use disperse_lab::spherical::{RadialFunction, RadialGrid};
use proptest::prelude::*;

/// Nonnegative bump `e^{−a(r−c)²}` with unit mass `∫ |κ| δ dr` (the `p = 1` bound).
fn unit_bump(space: RankOneSpace, a: f64, c: f64) -> RadialFunction {
    let grid = RadialGrid::uniform(12.0, 1201).unwrap();
    let f = RadialFunction::from_real_fn(space, grid, move |r| (-a * (r - c) * (r - c)).exp()).unwrap();
    let mass = herz_bound(&space, &f, 1.0).unwrap();
    f.scaled((1.0 / mass).into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn herz_bound_is_dual_symmetric(p in 1.01f64..2.0, a in 0.5f64..4.0, c in 0.0f64..3.0) {
        for s in [RankOneSpace::h2(), RankOneSpace::h3()] {
            let k = unit_bump(s, a, c);
            let x = herz_bound(&s, &k, p).unwrap();
            let y = herz_bound(&s, &k, p / (p - 1.0)).unwrap();
            prop_assert!((x - y).abs() <= 1e-12 * x, "{x} vs {y}");
        }
    }

    #[test]
    fn a2_norm_is_the_p2_herz_bound(a in 0.5f64..4.0, c in 0.0f64..3.0) {
        for s in [RankOneSpace::h2(), RankOneSpace::h3()] {
            let k = unit_bump(s, a, c);
            prop_assert_eq!(aq_norm(&s, &k, 2.0).unwrap().value, herz_bound(&s, &k, 2.0).unwrap());
        }
    }

    #[test]
    fn herz_bound_gains_over_l1(p in 1.05f64..20.0, a in 0.5f64..4.0, c in 1.0f64..4.0) {
        for s in [RankOneSpace::h2(), RankOneSpace::h3()] {
            let k = unit_bump(s, a, c);
            let l1 = herz_bound(&s, &k, 1.0).unwrap();
            prop_assert!((l1 - 1.0).abs() <= 1e-9);
            prop_assert!(herz_bound(&s, &k, p).unwrap() < l1);
        }
    }

    #[test]
    fn dispersive_exponent_symmetric_and_monotone(q in 2.01f64..50.0, qt in 2.01f64..50.0, dq in 0.0f64..10.0, n in 2u32..8) {
        let e = |a: f64, b: f64| dispersive_exponent(n, a, b, Regime::SmallTime).unwrap();
        prop_assert_eq!(e(q, qt), e(qt, q));
        prop_assert!(e(q + dq, qt) >= e(q, qt));
        prop_assert!(e(q, qt + dq) >= e(q, qt));
        for r in [Regime::LargeTimeRankOne, Regime::LargeTimeComplex] {
            prop_assert_eq!(dispersive_exponent(n, q, qt, r).unwrap(), dispersive_exponent(n, qt, q, r).unwrap());
        }
    }
}
