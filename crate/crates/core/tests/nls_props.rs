use disperse_lab::lie_data::RankOneSpace;
use disperse_lab::nls::{
    duhamel_solve_in, first_order_iterate, is_admissible, linear_propagate_in, scattering_residual, NlsOptions, SineBasis,
};
use disperse_lab::spherical::RadialFunction;
use num_complex::Complex64;
use proptest::prelude::*;

fn basis() -> SineBasis {
    SineBasis::new(60.0, 2047).unwrap()
}

fn bump(basis: &SineBasis, width: f64, eps: f64) -> RadialFunction {
    let g = RadialFunction::from_real_fn(RankOneSpace::h3(), basis.grid().clone(), move |r| (-0.5 * (r / width).powi(2)).exp()).unwrap();
    let n = g.l2_norm();
    g.scaled(Complex64::new(eps / n, 0.0))
}

fn distance(a: &RadialFunction, b: &RadialFunction) -> f64 {
    RadialFunction::new(a.space, a.grid.clone(), a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect())
        .unwrap()
        .l2_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_flow_is_unitary(t in -10.0f64..10.0, width in 0.5f64..2.0) {
        let b = basis();
        let f = bump(&b, width, 1.0);
        let u = linear_propagate_in(&b, &RankOneSpace::h3(), &f, t).unwrap();
        prop_assert!((u.l2_norm() - 1.0).abs() <= 1e-8, "{}", u.l2_norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn admissibility_matches_the_inequality(x in 0.0f64..=0.6, y in 0.0f64..=0.6, n in 2u32..=3) {
        let nf = n as f64;
        let p = if x == 0.0 { f64::INFINITY } else { 1.0 / x };
        let q = if y == 0.0 { f64::INFINITY } else { 1.0 / y };
        let on_boundary = (2.0 * x + nf * y - nf / 2.0).abs() < 1e-9 || (x - 0.5).abs() < 1e-9 || (y - 0.5).abs() < 1e-9;
        prop_assume!(!on_boundary);
        // Open triangle 0 < 1/p ≤ 1/2, 0 < 1/q < 1/2, 2/p + n/q ≥ n/2, plus the point (0, 1/2).
        let expected = x > 0.0 && x <= 0.5 && y > 0.0 && y < 0.5 && 2.0 * x + nf * y >= nf / 2.0;
        prop_assert_eq!(is_admissible(n, p, q), expected, "(1/p, 1/q) = ({}, {})", x, y);
    }
}

#[test]
fn admissibility_endpoint() {
    for n in [2, 3] {
        assert!(is_admissible(n, f64::INFINITY, 2.0));
        assert!(!is_admissible(n, f64::INFINITY, 2.5));
    }
}

/// `u(T) − first iterate = O(ε^{2γ−1})`: doubling ε multiplies it by `2^{2γ−1}`.
#[test]
fn picard_correction_scales_with_the_second_iterate() {
    let b = basis();
    let h3 = RankOneSpace::h3();
    let opts = NlsOptions {
        dt: 0.05,
        ..NlsOptions::default()
    };
    let gamma = 2.0;
    let t = 2.0;
    let gap = |eps: f64| {
        let f = bump(&b, 1.0, eps);
        let run = duhamel_solve_in(&b, &h3, &f, gamma, t, &opts).unwrap();
        let first = first_order_iterate(&b, &h3, &f, gamma, t, &opts).unwrap();
        distance(run.state_at(t).unwrap(), &first)
    };
    let (g1, g2) = (gap(2e-3), gap(4e-3));
    let factor = g2 / g1;
    assert!((factor / 8.0 - 1.0).abs() < 0.05, "{g1:e} -> {g2:e}, factor {factor}");
}

#[test]
fn linear_runs_have_zero_scattering_residual() {
    let b = basis();
    let h3 = RankOneSpace::h3();
    let opts = NlsOptions {
        coupling: 0.0,
        dt: 0.05,
        ..NlsOptions::default()
    };
    let f = bump(&b, 1.0, 1e-2);
    let run = duhamel_solve_in(&b, &h3, &f, 2.0, 3.0, &opts).unwrap();
    for &t in &run.times {
        let r = scattering_residual(&run, t).unwrap();
        assert!(r.value <= 1e-12 * 1e-2, "t={t}: {:e}", r.value);
        assert_eq!(r.tail, 0.0);
    }
}
