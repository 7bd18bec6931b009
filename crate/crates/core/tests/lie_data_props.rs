use disperse_lab::lie_data::{catalog, density_delta, rho_p, s_exponent, Family};
use proptest::prelude::*;

#[test]
fn catalog_dimension_and_rho_identities() {
    for s in catalog() {
        assert_eq!(s.n, 1 + s.m_alpha + s.m_2alpha, "{s:?}");
        assert_eq!(s.rho, s.m_alpha as f64 / 2.0 + s.m_2alpha as f64, "{s:?}");
        if s.family == Family::Real {
            assert_eq!(s.m_2alpha, 0);
        }
    }
}

proptest! {
    #[test]
    // Up to r = 30 so that δ(r) stays finite on the octonionic plane (e^{22 r}).
    fn density_is_dominated_past_one(r in 1.0f64..30.0) {
        for s in catalog() {
            let d = density_delta(&s, r).unwrap() * (-2.0 * s.rho * r).exp();
            prop_assert!(d > 0.0 && d <= 1.0, "{s:?} r={r}: {d}");
        }
    }

    #[test]
    fn s_exponent_is_dual_symmetric(p in 1.0001f64..50.0) {
        let dual = p / (p - 1.0);
        let (a, b) = (s_exponent(p).unwrap(), s_exponent(dual).unwrap());
        prop_assert!((a - b).abs() <= 1e-12, "{p}: {a} vs {b}");
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn rho_p_is_convex_in_inverse_p(x in 0.0f64..1.0, y in 0.0f64..1.0, w in 0.0f64..1.0) {
        let p_of = |u: f64| if u == 0.0 { f64::INFINITY } else { 1.0 / u };
        for s in catalog() {
            let f = |u: f64| rho_p(&s, p_of(u)).unwrap();
            let mid = w * x + (1.0 - w) * y;
            prop_assert!(f(mid) <= w * f(x) + (1.0 - w) * f(y) + 1e-12);
            if (x - 0.5).abs() > 1e-9 {
                prop_assert!(f(x) > 0.0);
            }
        }
    }
}

#[test]
fn rho_p_vanishes_at_two() {
    for s in catalog() {
        assert_eq!(rho_p(&s, 2.0).unwrap(), 0.0);
        assert_eq!(rho_p(&s, 1.0).unwrap(), s.rho);
        assert_eq!(rho_p(&s, f64::INFINITY).unwrap(), s.rho);
    }
}
