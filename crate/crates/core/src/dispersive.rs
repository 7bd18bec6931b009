//! Kunze–Stein/Herz bounds, `A_q` norms, `L¹ → L^q` operator norms on
//! quotients and the dispersive exponent profile.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete_group::fundamental_domain::axis_frame;
use crate::discrete_group::automorphic::complex_sum;
use crate::discrete_group::{
    orbit_sum_cutoff, periodized_integrals, quotient_lq_norm, quotient_lq_norm_gaussian, DiscreteGroup, GroupKind, KernelEvaluator,
    McConfig, Point,
};
use crate::error::{domain, Error, Result};
use crate::kernels::{global_psi, kernel_lq_norm, least_squares_slope, schrodinger_kernel_value};
use crate::lie_data::{rho_p, s_exponent, RankOneSpace};
use crate::quad::CompensatedSum;
use crate::spherical::{euclidean_reduction_gaussian, phi0, phi0_h3, phi_imaginary, RadialFunction, RadialGrid};

/// `∫ |κ| w δ dr` over the grid of `κ`, treating `κ` as zero past its last
/// point. Fails with a divergence error when the integrand has not decayed
/// at the edge of a grid on which `κ` is still nonzero.
fn weighted_integral(kappa: &RadialFunction, weight: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    let space = kappa.space;
    let pts = kappa.grid.points();
    let terms: Vec<f64> = pts
        .par_iter()
        .zip(kappa.grid.weights())
        .zip(&kappa.values)
        .map(|((&r, &w), v)| {
            let dens = space.density_unchecked(r);
            if dens == 0.0 || v.norm() == 0.0 {
                return Ok(0.0);
            }
            Ok(w * v.norm() * weight(r)? * dens)
        })
        .collect::<Result<_>>()?;
    let mut acc = CompensatedSum::new();
    for &t in &terms {
        acc.add(t);
    }
    let total = acc.value();
    if !total.is_finite() {
        return Err(Error::Divergence(format!("weighted integral over {} is not finite", space.label())));
    }
    let n = pts.len();
    let edge = kappa.values[n - 1].norm();
    if edge > 0.0 && n >= 2 {
        let r = pts[n - 1];
        let g = edge * weight(r)? * space.density_unchecked(r);
        if g * r > 1e-8 * total.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence(format!(
                "integrand |κ|·φ·δ = {g:.3e} has not decayed at the grid edge r = {r}"
            )));
        }
    }
    Ok(total)
}

/// Herz majorant `∫ |κ| φ_{−iρ_p} δ dr` of the `L^p` convolution norm.
pub fn herz_bound(space: &RankOneSpace, kappa: &RadialFunction, p: f64) -> Result<f64> {
    if kappa.space != *space {
        return domain("kernel was sampled on a different space");
    }
    let mu = rho_p(space, p)?;
    weighted_integral(kappa, |r| {
        if mu == space.rho {
            Ok(1.0)
        } else if mu == 0.0 {
            phi0(space, r)
        } else {
            phi_imaginary(space, mu, r)
        }
    })
}

/// `∫ |κ| φ₀^{s(p)} δ dr`, the locally symmetric Kunze–Stein bound.
pub fn ks_locsym_bound(space: &RankOneSpace, kappa: &RadialFunction, p: f64) -> Result<f64> {
    if kappa.space != *space {
        return domain("kernel was sampled on a different space");
    }
    let s = s_exponent(p)?;
    weighted_integral(kappa, |r| Ok(phi0(space, r)?.powf(s)))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AqNorm {
    pub q: f64,
    pub value: f64,
}

/// `‖κ‖_{A_q} = (∫ |κ|^{q/2} φ₀ δ dr)^{2/q}`, the sup norm at `q = ∞`.
pub fn aq_norm(space: &RankOneSpace, kappa: &RadialFunction, q: f64) -> Result<AqNorm> {
    if !(q >= 2.0) {
        return domain(format!("A_q norms need q >= 2, got {q}"));
    }
    if kappa.space != *space {
        return domain("kernel was sampled on a different space");
    }
    if q.is_infinite() {
        let start = usize::from(kappa.singular_at_origin);
        let value = kappa.values[start..].iter().map(|v| v.norm()).fold(0.0, f64::max);
        return Ok(AqNorm { q, value });
    }
    let powered = RadialFunction {
        values: kappa.values.iter().map(|v| Complex64::new(v.norm().powf(q / 2.0), 0.0)).collect(),
        ..kappa.clone()
    };
    let integral = weighted_integral(&powered, |r| phi0(space, r))?;
    Ok(AqNorm {
        q,
        value: integral.powf(2.0 / q),
    })
}

/// Radius past which `(1+r)^{q/2+1} e^{−ρ(q/2−1) r}` is below `1e−13` of its peak.
fn aq_cutoff(space: &RankOneSpace, q: f64) -> f64 {
    let k = space.rho * (q / 2.0 - 1.0);
    let m = q / 2.0 + 1.0;
    let g = |r: f64| m * (1.0 + r).ln() - k * r;
    let peak = g((m / k - 1.0).max(0.0));
    let mut r = 4.0;
    while g(r) - peak > -13.0 * std::f64::consts::LN_10 && r < 600.0 {
        r += 0.5;
    }
    r
}

/// `‖s_t‖_{A_q}` with the kernel truncated to `r ≤ radius` (default: a
/// cutoff where the integrand is negligible).
pub fn kernel_aq_norm(space: &RankOneSpace, t: f64, q: f64, radius: Option<f64>) -> Result<AqNorm> {
    if !(q > 2.0) {
        return domain(format!("kernel A_q norms need q > 2, got {q}"));
    }
    if q.is_infinite() {
        return Ok(AqNorm {
            q,
            value: schrodinger_kernel_value(space, t, 0.0)?.norm(),
        });
    }
    let r_max = radius.unwrap_or_else(|| aq_cutoff(space, q));
    let points = 1 + 2 * ((r_max / 0.02).ceil() as usize / 2).max(8);
    let grid = RadialGrid::geometric(r_max, points, 2.0)?;
    let f = RadialFunction::new(
        *space,
        grid.clone(),
        grid.points()
            .par_iter()
            .map(|&r| schrodinger_kernel_value(space, t, r))
            .collect::<Result<_>>()?,
    )?;
    let powered = RadialFunction {
        values: f.values.iter().map(|v| Complex64::new(v.norm().powf(q / 2.0), 0.0)).collect(),
        ..f
    };
    // Truncation is intended here; skip the edge check.
    let mut acc = CompensatedSum::new();
    for ((&r, &w), v) in powered.grid.points().iter().zip(powered.grid.weights()).zip(&powered.values) {
        let dens = space.density_unchecked(r);
        if dens != 0.0 {
            acc.add(w * v.re * phi0(space, r)? * dens);
        }
    }
    Ok(AqNorm {
        q,
        value: acc.value().powf(2.0 / q),
    })
}

// ---------------------------------------------------------------------------
// Operator norms on the quotient
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpNormEstimate {
    pub t: f64,
    pub q: f64,
    /// `sup_x ‖ŝ_t(x, ·)‖_{L^q(M)}` over the basepoint samples.
    pub upper: f64,
    pub upper_stderr: f64,
    /// `‖Ŝ_t f‖_q / ‖f‖₁` for the smoothed bump `f = ĥ_σ(x, ·)`.
    pub lower: f64,
    pub lower_stderr: f64,
    pub sigma: f64,
    /// `Ψ(t)` for the space (rank one).
    pub psi: f64,
    pub basepoints: Vec<Point>,
}

impl OpNormEstimate {
    pub fn upper_over_psi(&self) -> f64 {
        self.upper / self.psi
    }
}

/// Basepoints used for the supremum: on the axis and at Fermi distances 0.5
/// and 1.5 for cyclic groups; the standard basepoint and two nearby points of
/// the Ford domain for Schottky groups.
pub fn basepoint_samples(group: &DiscreteGroup) -> Result<Vec<Point>> {
    let o = group.model.origin();
    match group.kind {
        GroupKind::Trivial => Ok(vec![o]),
        GroupKind::Cyclic { .. } => {
            let p = axis_frame(&group.generators[0], group.model)?;
            Ok([0.0f64, 0.5, 1.5]
                .iter()
                .map(|&rho| {
                    let local = match group.model {
                        crate::discrete_group::Model::UpperHalfPlane => Point::plane(Complex64::new(rho.tanh(), 1.0 / rho.cosh())),
                        crate::discrete_group::Model::UpperHalfSpace => Point::space(Complex64::new(rho.tanh(), 0.0), 1.0 / rho.cosh()),
                    };
                    p.act(&local)
                })
                .collect())
        }
        GroupKind::Schottky => {
            let cands = [0.0f64, 0.3, -0.3].map(|s| {
                let h = s.exp();
                match group.model {
                    crate::discrete_group::Model::UpperHalfPlane => Point::plane(Complex64::new(0.0, h)),
                    crate::discrete_group::Model::UpperHalfSpace => Point::space(Complex64::new(0.0, 0.0), h),
                }
            });
            Ok(cands
                .into_iter()
                .filter(|y| crate::discrete_group::orbit::in_ford_domain(group, y))
                .collect())
        }
        GroupKind::Generic => Err(Error::UnsupportedGroup(format!(
            "{}: no fundamental domain is known for this group",
            group.label
        ))),
    }
}

/// Two-sided estimate of `‖Ŝ_t‖_{L¹(M) → L^q(M)}`.
///
/// The upper value is the kernel norm `sup_x ‖ŝ_t(x,·)‖_q`; the lower value
/// tests the operator on `ĥ_σ(x₀, ·)` (unit `L¹` mass by unfolding), whose
/// image is the periodized kernel of `e^{−(σ − it)(λ²+|ρ|²)}`.
pub fn opnorm_l1_to_lq(group: &DiscreteGroup, t: f64, q: f64, cfg: &McConfig) -> Result<OpNormEstimate> {
    if !(q > 2.0) || !q.is_finite() {
        return domain(format!("operator norms need 2 < q < inf, got {q}"));
    }
    if t == 0.0 || !t.is_finite() {
        return domain(format!("propagator needs t != 0, got {t}"));
    }
    let space = group.space();
    let sigma = 0.05;
    let a = Complex64::new(sigma, -t);
    let psi = global_psi(t, group.model.dimension(), true);
    let basepoints = basepoint_samples(group)?;
    if group.kind == GroupKind::Trivial {
        let upper = kernel_lq_norm(&space, t, q)?.value;
        let lower = gaussian_lq_norm(&space, a, q)?;
        return Ok(OpNormEstimate {
            t,
            q,
            upper,
            upper_stderr: 0.0,
            lower,
            lower_stderr: 0.0,
            sigma,
            psi,
            basepoints,
        });
    }
    let mut upper = 0.0;
    let mut upper_stderr = 0.0;
    for x in &basepoints {
        let est = quotient_lq_norm(group, t, q, x, cfg)?;
        if est.value > upper {
            upper = est.value;
            upper_stderr = est.stderr;
        }
    }
    let low = quotient_lq_norm_gaussian(group, a, q, &basepoints[0], cfg)?;
    Ok(OpNormEstimate {
        t,
        q,
        upper,
        upper_stderr,
        lower: low.value,
        lower_stderr: low.stderr,
        sigma,
        psi,
        basepoints,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AutomorphicRatio {
    pub t: f64,
    pub q: f64,
    /// `‖ŝ_t‖_{L^q(M)} / ‖s_t‖_{L^q(X)}`.
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// `‖Σ_γ φ₀(d(x, γ·))‖_{L^q(M)} / ‖φ₀‖_{L^q(X)}` from the same samples.
    /// On H³ `|s_t| = |s_t(0)| φ₀`, so this dominates the ratio sample by
    /// sample and does not depend on `t`.
    pub majorant: f64,
    pub majorant_stderr: f64,
}

/// Quotient-to-space `L^q` ratio of the Schrödinger kernel on H³ together
/// with its `φ₀` majorant.
pub fn automorphic_lq_ratio(group: &DiscreteGroup, t: f64, q: f64, x: &Point, cfg: &McConfig) -> Result<AutomorphicRatio> {
    let space = group.space();
    if !space.is_real_hyperbolic(3) {
        return Err(Error::UnsupportedSpace(format!(
            "the φ₀ majorant is exact on H3 only, got {}",
            space.label()
        )));
    }
    if !(q > 2.0) || !q.is_finite() {
        return domain(format!("quotient norms need 2 < q < inf, got {q}"));
    }
    let ev = KernelEvaluator::new(&space, t, 1.0)?;
    let env = ev.envelope;
    let rel = if matches!(group.kind, GroupKind::Trivial | GroupKind::Cyclic { .. }) { 1e-12 } else { 1e-6 };
    let (cutoff, _) = orbit_sum_cutoff(group, &env, rel)?;
    let (m, _) = periodized_integrals(group, x, cfg, |r| (env.at(r) / env.k).powf(q), cutoff, 2, |d| {
        let terms: Vec<Complex64> = d.iter().map(|&r| ev.eval(r)).collect();
        let phis: Vec<f64> = d.iter().map(|&r| phi0_h3(r)).collect();
        let mut acc = CompensatedSum::new();
        for p in phis {
            acc.add(p);
        }
        vec![complex_sum(&terms).norm().powf(q), acc.value().powf(q)]
    })?;
    let x_norm = kernel_lq_norm(&space, t, q)?.value;
    let amp = schrodinger_kernel_value(&space, t, 0.0)?.norm();
    let phi_norm = x_norm / amp;
    let root = |mo: &crate::discrete_group::Moments| {
        let v = mo.mean.powf(1.0 / q);
        let se = if mo.mean > 0.0 { mo.stderr * v / (q * mo.mean) } else { 0.0 };
        (v, se)
    };
    let (s_m, s_se) = root(&m[0]);
    let (p_m, p_se) = root(&m[1]);
    Ok(AutomorphicRatio {
        t,
        q,
        ratio: s_m / x_norm,
        ratio_stderr: s_se / x_norm,
        majorant: p_m / phi_norm,
        majorant_stderr: p_se / phi_norm,
    })
}

/// `‖H⁻¹(e^{−a(λ²+|ρ|²)})‖_{L^q(X)}` by radial quadrature.
pub fn gaussian_lq_norm(space: &RankOneSpace, a: Complex64, q: f64) -> Result<f64> {
    let r_max = 80.0 / (space.rho * (q - 2.0)).max(0.5) + 10.0;
    let points = 1 + 2 * ((r_max / 0.02).ceil() as usize / 2);
    let grid = RadialGrid::geometric(r_max, points, 2.0)?;
    let f = RadialFunction::from_fn(*space, grid, |r| euclidean_reduction_gaussian(space, a, r).unwrap_or(Complex64::new(f64::NAN, 0.0)))?;
    Ok(f.lq_norm(q))
}

// ---------------------------------------------------------------------------
// Exponents and fits
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallTime,
    LargeTimeRankOne,
    LargeTimeComplex,
}

/// Decay exponent of `‖S_t‖_{L^{q̃'} → L^q}`.
pub fn dispersive_exponent(n: u32, q: f64, q_tilde: f64, regime: Regime) -> Result<f64> {
    if !(q > 2.0) || !(q_tilde > 2.0) {
        return domain(format!("dispersive exponents need q, q~ > 2, got {q}, {q_tilde}"));
    }
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    Ok(match regime {
        Regime::SmallTime => n as f64 * (0.5 - inv(q)).max(0.5 - inv(q_tilde)),
        Regime::LargeTimeRankOne => 1.5,
        Regime::LargeTimeComplex => n as f64 / 2.0,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares slope of `log value` against `log t`.
pub fn decay_fit(times: &[f64], values: &[f64]) -> Result<DecayFit> {
    if times.len() != values.len() {
        return domain("times and values differ in length");
    }
    if times.len() < 5 {
        return domain(format!("decay fits need at least 5 samples, got {}", times.len()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return domain(format!("decay fits need positive values, got {v}"));
    }
    if let Some(t) = times.iter().find(|t| !(**t > 0.0)) {
        return domain(format!("decay fits need positive times, got {t}"));
    }
    let pts: Vec<(f64, f64)> = times.iter().zip(values).map(|(t, v)| (t.ln(), v.ln())).collect();
    let (slope, stderr) = least_squares_slope(&pts).ok_or_else(|| Error::Numerical {
        message: "decay fit needs at least two distinct times".into(),
        residual: f64::NAN,
    })?;
    Ok(DecayFit {
        slope,
        stderr,
        points: times.len(),
    })
}

/// `n` log-spaced times on `[a, b]`.
pub fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(space: RankOneSpace) -> RadialFunction {
        let grid = RadialGrid::uniform(2.0, 2001).unwrap();
        RadialFunction::from_real_fn(space, grid, |r| if r <= 1.0 { 1.0 } else { 0.0 }).unwrap()
    }

    fn gaussian(space: RankOneSpace) -> RadialFunction {
        let grid = RadialGrid::uniform(12.0, 2401).unwrap();
        RadialFunction::from_real_fn(space, grid, |r| (-r * r).exp()).unwrap()
    }

    #[test]
    fn herz_endpoints() {
        for space in [RankOneSpace::h2(), RankOneSpace::h3()] {
            let k = gaussian(space);
            let p2 = herz_bound(&space, &k, 2.0).unwrap();
            let direct = weighted_integral(&k, |r| phi0(&space, r)).unwrap();
            assert!((p2 - direct).abs() <= 1e-14 * direct);
            let a2 = aq_norm(&space, &k, 2.0).unwrap().value;
            assert!((a2 - p2).abs() <= 1e-13 * p2);
            let l1 = weighted_integral(&k, |_| Ok(1.0)).unwrap();
            assert!((herz_bound(&space, &k, 1.0).unwrap() - l1).abs() <= 1e-14 * l1);
            for p in [1.2, 1.5, 3.0, 6.0] {
                let dual = p / (p - 1.0);
                let (a, b) = (herz_bound(&space, &k, p).unwrap(), herz_bound(&space, &k, dual).unwrap());
                assert!((a - b).abs() <= 1e-12 * a, "p={p}");
                assert!(a >= p2 && a <= l1);
            }
        }
    }

    #[test]
    fn herz_gain_on_unit_bump() {
        let space = RankOneSpace::h2();
        let k = bump(space);
        let l1 = 1f64.cosh() - 1.0;
        assert!(herz_bound(&space, &k, 2.0).unwrap() < l1);
        assert_eq!(herz_bound(&space, &RadialFunction::zeros(space, RadialGrid::uniform(2.0, 11).unwrap()), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn divergent_kernel_is_reported() {
        let space = RankOneSpace::h3();
        let grid = RadialGrid::uniform(20.0, 401).unwrap();
        let k = RadialFunction::from_real_fn(space, grid, |r| (-0.5 * r).exp()).unwrap();
        assert!(matches!(herz_bound(&space, &k, 1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn ks_bound_limits() {
        let space = RankOneSpace::h3();
        let k = gaussian(space);
        let p2 = herz_bound(&space, &k, 2.0).unwrap();
        assert!((ks_locsym_bound(&space, &k, 2.0).unwrap() - p2).abs() < 1e-14 * p2);
        let b4 = ks_locsym_bound(&space, &k, 4.0).unwrap();
        assert!(b4 >= p2);
        let l1 = weighted_integral(&k, |_| Ok(1.0)).unwrap();
        let near1 = ks_locsym_bound(&space, &k, 1.0 + 1e-6).unwrap();
        assert!((near1 - l1).abs() < 1e-4 * l1);
    }

    #[test]
    fn aq_sup_norm_of_indicator() {
        let space = RankOneSpace::h2();
        assert_eq!(aq_norm(&space, &bump(space), f64::INFINITY).unwrap().value, 1.0);
        assert!(aq_norm(&space, &bump(space), 1.5).is_err());
    }

    #[test]
    fn aq_kernel_cutoff_is_monotone() {
        let space = RankOneSpace::h3();
        let mut last = 0.0;
        for r in [2.0, 5.0, 10.0, 20.0, 40.0] {
            let v = kernel_aq_norm(&space, 3.0, 4.0, Some(r)).unwrap().value;
            assert!(v >= last);
            last = v;
        }
        let full = kernel_aq_norm(&space, 3.0, 4.0, None).unwrap().value;
        assert!(full >= last && (full - last) < 1e-6 * full);
    }

    #[test]
    fn exponent_profile() {
        assert_eq!(dispersive_exponent(3, f64::INFINITY, f64::INFINITY, Regime::SmallTime).unwrap(), 1.5);
        assert_eq!(dispersive_exponent(3, 4.0, 8.0, Regime::LargeTimeRankOne).unwrap(), 1.5);
        assert_eq!(dispersive_exponent(6, 4.0, 8.0, Regime::LargeTimeComplex).unwrap(), 3.0);
        let near = dispersive_exponent(3, 2.0 + 1e-9, 2.0 + 1e-9, Regime::SmallTime).unwrap();
        assert!(near > 0.0 && near < 1e-8);
        assert!(dispersive_exponent(3, 2.0, 4.0, Regime::SmallTime).is_err());
    }

    #[test]
    fn decay_fits() {
        let t = log_times(1.0, 100.0, 9);
        let exact: Vec<f64> = t.iter().map(|t| t.powf(-1.5)).collect();
        let fit = decay_fit(&t, &exact).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12 && fit.stderr < 1e-12);
        let wobble: Vec<f64> = t.iter().map(|t| t.powf(-1.5) * (1.0 + 0.1 * t.ln().sin())).collect();
        let fit = decay_fit(&t, &wobble).unwrap();
        assert!(fit.slope > -1.6 && fit.slope < -1.4);
        assert!(decay_fit(&t[..4], &exact[..4]).is_err());
        let mut bad = exact.clone();
        bad[2] = 0.0;
        assert!(decay_fit(&t, &bad).is_err());
    }

    #[test]
    fn trivial_opnorm_is_kernel_norm() {
        let space = RankOneSpace::h3();
        let g = DiscreteGroup::trivial(crate::discrete_group::Model::UpperHalfSpace);
        let est = opnorm_l1_to_lq(&g, 2.0, 4.0, &McConfig::default()).unwrap();
        assert_eq!(est.upper, kernel_lq_norm(&space, 2.0, 4.0).unwrap().value);
        assert!(est.lower <= est.upper);
    }
}
