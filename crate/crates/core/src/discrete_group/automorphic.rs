//! Automorphic Schrödinger kernel `ŝ_t(x, y) = Σ_γ s_t(d(x, γy))`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{distance_unchecked, Point};
use super::orbit::{enumerate_orbit, OrbitLimits};
use super::poincare::{critical_exponent_estimate, CriticalExponent};
use super::{DiscreteGroup, GroupKind};
use crate::error::{domain, Error, Result};
use crate::lie_data::RankOneSpace;
use crate::spherical::euclidean_reduction_gaussian;

/// `|s_t(r)| ≤ k (1 + r) e^{−ρ r}` for all `r ≥ 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KernelEnvelope {
    pub k: f64,
    pub rho: f64,
}

impl KernelEnvelope {
    pub fn at(&self, r: f64) -> f64 {
        self.k * (1.0 + r) * (-self.rho * r).exp()
    }

    /// `∫_R^∞ (1 + r) e^{−κ r} dr` scaled by `k`.
    fn tail_integral(&self, kappa: f64, r: f64) -> f64 {
        self.k * (-kappa * r).exp() * ((1.0 + r) / kappa + 1.0 / (kappa * kappa))
    }

    /// Bound on `Σ_{|j| > K} envelope(jℓ − d₀)` with `Kℓ − d₀ = u`, valid once
    /// the envelope is decreasing past `u` (`u ≥ 1/ρ − 1`).
    pub(crate) fn cyclic_tail(&self, ell: f64, u: f64) -> f64 {
        let u = u.max(1.0 / self.rho - 1.0).max(0.0);
        2.0 * (self.at(u) + self.tail_integral(self.rho, u) / ell)
    }

    /// Bound on `Σ_{d(x,γy) > R} envelope(d)` when `N(r) ≤ B e^{δ r}`;
    /// Stieltjes integration by parts against `−envelope' ≤ ρ·k(1+r)e^{−ρr}`.
    pub(crate) fn counting_tail(&self, b: f64, delta: f64, r: f64) -> f64 {
        let r = r.max(1.0 / self.rho - 1.0);
        self.rho * b * self.tail_integral(self.rho - delta, r)
    }
}

/// Pointwise evaluator of the Gaussian-multiplier kernel `H⁻¹(e^{−a(λ²+|ρ|²)})`
/// (`a = −it` for `s_t`, `a = σ − it` for smoothed propagators) with its
/// envelope. On H³ the closed form is used; on H² the Abel-reduced kernel is
/// tabulated with the oscillating factor `e^{−i r² Im(1/4a)}` divided out and
/// interpolated cubically.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    pub a: Complex64,
    pub envelope: KernelEnvelope,
    table: Option<Table>,
}

#[derive(Clone, Debug)]
struct Table {
    step: f64,
    amplitude: Vec<Complex64>,
    space: RankOneSpace,
}

/// Table spacing on H².
const TABLE_STEP: f64 = 0.01;

impl KernelEvaluator {
    /// `s_t`, tabulated up to `r_max` on H² (larger radii fall back to direct evaluation).
    pub fn new(space: &RankOneSpace, t: f64, r_max: f64) -> Result<Self> {
        if t == 0.0 || !t.is_finite() {
            return domain(format!("Schrödinger kernel needs t != 0, got {t}"));
        }
        Self::gaussian(space, Complex64::new(0.0, -t), r_max)
    }

    /// General `a` with `Re a ≥ 0`, `a ≠ 0`.
    pub fn gaussian(space: &RankOneSpace, a: Complex64, r_max: f64) -> Result<Self> {
        if !(a.re >= 0.0) || a.norm() == 0.0 || !a.is_finite() {
            return domain(format!("Gaussian parameter must satisfy Re a >= 0, a != 0; got {a}"));
        }
        if space.is_real_hyperbolic(3) {
            // (r / sinh r) ≤ 2 (1 + r) e^{−r} and |e^{−r²/4a}| ≤ 1.
            let k = 2.0 * h3_prefactor(a).norm();
            return Ok(Self {
                a,
                envelope: KernelEnvelope { k, rho: 1.0 },
                table: None,
            });
        }
        if !space.is_real_hyperbolic(2) {
            return Err(Error::UnsupportedSpace(format!(
                "automorphic kernels are implemented on H2 and H3, not {}",
                space.label()
            )));
        }
        let r_max = r_max.max(40.0);
        let n = (r_max / TABLE_STEP).ceil() as usize + 3;
        let amplitude = (0..n)
            .into_par_iter()
            .map(|j| {
                let r = j as f64 * TABLE_STEP;
                Ok(euclidean_reduction_gaussian(space, a, r)? * phase(a, r).conj())
            })
            .collect::<Result<Vec<_>>>()?;
        let rho = space.rho;
        let sup = amplitude
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let r = j as f64 * TABLE_STEP;
                v.norm() / ((1.0 + r) * (-rho * r).exp())
            })
            .fold(0.0, f64::max);
        Ok(Self {
            a,
            envelope: KernelEnvelope { k: 1.1 * sup, rho },
            table: Some(Table {
                step: TABLE_STEP,
                amplitude,
                space: *space,
            }),
        })
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        match &self.table {
            None => h3_prefactor(self.a) * crate::spherical::phi0_h3(r) * (-(r * r) / (self.a * 4.0)).exp(),
            Some(tab) => {
                let x = r / tab.step;
                let j = x.floor() as usize;
                if j + 2 >= tab.amplitude.len() {
                    return euclidean_reduction_gaussian(&tab.space, self.a, r).unwrap_or_default();
                }
                let j0 = j.max(1) - 1;
                let u = x - j0 as f64 - 1.0;
                let p = &tab.amplitude[j0..j0 + 4];
                // Cubic Lagrange on nodes −1, 0, 1, 2 relative to j0 + 1.
                let l0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
                let l1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
                let l2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
                let l3 = (u + 1.0) * u * (u - 1.0) / 6.0;
                (p[0] * l0 + p[1] * l1 + p[2] * l2 + p[3] * l3) * phase(self.a, r)
            }
        }
    }
}

/// `(4πa)^{−3/2} e^{−a}` on H³.
fn h3_prefactor(a: Complex64) -> Complex64 {
    (a * (4.0 * std::f64::consts::PI)).powf(-1.5) * (-a).exp()
}

fn phase(a: Complex64, r: f64) -> Complex64 {
    Complex64::from_polar(1.0, -r * r * (1.0 / (a * 4.0)).im)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutomorphicValue {
    pub value: Complex64,
    /// Bound on the omitted terms.
    pub tail_bound: f64,
    /// Truncation radius.
    pub radius: f64,
    pub terms: usize,
    pub envelope: KernelEnvelope,
    /// Critical exponent estimate used for the gate (absent for the trivial group).
    pub critical_exponent: Option<CriticalExponent>,
}

/// `ŝ_t(x, y)` truncated where the tail bound drops below `epsilon`.
///
/// Cyclic groups use `d(x, gᵏy) ≥ |k|ℓ − d(x,y)`. Other groups bound the
/// tail through the orbit counting function `N(r) ≤ B e^{δ' r}` with
/// `δ' = δ̂ + half-width` and `B` fitted on the certified counts.
pub fn automorphic_kernel(group: &DiscreteGroup, t: f64, x: &Point, y: &Point, epsilon: f64) -> Result<AutomorphicValue> {
    automorphic_kernel_with(group, t, x, y, epsilon, None)
}

/// As [`automorphic_kernel`] with an explicit truncation radius (the tail
/// bound is still reported).
pub fn automorphic_kernel_with(
    group: &DiscreteGroup,
    t: f64,
    x: &Point,
    y: &Point,
    epsilon: f64,
    radius: Option<f64>,
) -> Result<AutomorphicValue> {
    if t == 0.0 || !t.is_finite() {
        return domain(format!("Schrödinger kernel needs t != 0, got {t}"));
    }
    if !(epsilon > 0.0) {
        return domain(format!("tail tolerance must be positive, got {epsilon}"));
    }
    x.check()?;
    y.check()?;
    let space = group.space();
    let d_xy = distance_unchecked(x, y);
    let ce = if group.kind == GroupKind::Trivial {
        None
    } else {
        let ce = critical_exponent_estimate(group)?;
        if !ce.admits(space.rho_m) {
            return Err(Error::ClassViolation(format!(
                "{}: critical exponent {:.4} + {:.4} is not below rho_m = {}",
                group.label, ce.value, ce.half_width, space.rho_m
            )));
        }
        Some(ce)
    };

    match group.kind {
        GroupKind::Trivial => {
            let ev = KernelEvaluator::new(&space, t, d_xy + 1.0)?;
            Ok(AutomorphicValue {
                value: ev.eval(d_xy),
                tail_bound: 0.0,
                radius: d_xy,
                terms: 1,
                envelope: ev.envelope,
                critical_exponent: None,
            })
        }
        GroupKind::Cyclic { ell } => {
            // Smallest K with the tail below epsilon.
            let probe = KernelEvaluator::new(&space, t, 1.0)?;
            let mut kmax = ((d_xy + 1.0 / space.rho) / ell).ceil() as usize;
            match radius {
                Some(r) => kmax = ((r + d_xy) / ell).floor() as usize,
                None => {
                    while probe.envelope.cyclic_tail(ell, (kmax + 1) as f64 * ell - d_xy) > epsilon {
                        kmax += 1;
                    }
                }
            }
            let r_need = kmax as f64 * ell + d_xy;
            let ev = if space.is_real_hyperbolic(3) { probe } else { KernelEvaluator::new(&space, t, r_need)? };
            let g = group.generators[0];
            let ginv = g.inverse();
            let mut terms = vec![ev.eval(d_xy)];
            let (mut fwd, mut bwd) = (g, ginv);
            for _ in 0..kmax {
                terms.push(ev.eval(distance_unchecked(x, &fwd.act(y))));
                terms.push(ev.eval(distance_unchecked(x, &bwd.act(y))));
                fwd = fwd * g;
                bwd = bwd * ginv;
            }
            let tail = ev.envelope.cyclic_tail(ell, (kmax + 1) as f64 * ell - d_xy);
            Ok(AutomorphicValue {
                value: complex_sum(&terms),
                tail_bound: tail,
                radius: kmax as f64 * ell - d_xy,
                terms: terms.len(),
                envelope: ev.envelope,
                critical_exponent: ce,
            })
        }
        GroupKind::Schottky | GroupKind::Generic => {
            let ce = ce.expect("gate computed");
            let delta = ce.upper();
            let b = counting_constant(&ce, delta, d_xy);
            let probe = KernelEvaluator::new(&space, t, 1.0)?;
            let r = match radius {
                Some(r) => r,
                None => {
                    let mut r = 1.0;
                    while probe.envelope.counting_tail(b, delta, r) > epsilon {
                        r += 0.25;
                        if r > 200.0 {
                            return Err(Error::Numerical {
                                message: format!("no truncation radius below 200 reaches tail {epsilon:e}"),
                                residual: probe.envelope.counting_tail(b, delta, r),
                            });
                        }
                    }
                    r
                }
            };
            let orbit = enumerate_orbit(group, x, y, OrbitLimits::radius(r))?;
            if !orbit.complete {
                return Err(Error::Numerical {
                    message: format!("orbit enumeration to radius {r:.2} exceeded its budget"),
                    residual: probe.envelope.counting_tail(b, delta, r),
                });
            }
            let ev = if space.is_real_hyperbolic(3) { probe } else { KernelEvaluator::new(&space, t, r)? };
            let mut entries = orbit.entries;
            entries.sort_by(|p, q| p.distance.total_cmp(&q.distance).then_with(|| p.word.cmp(&q.word)));
            let terms: Vec<Complex64> = entries.iter().map(|e| ev.eval(e.distance)).collect();
            Ok(AutomorphicValue {
                value: complex_sum(&terms),
                tail_bound: ev.envelope.counting_tail(b, delta, r),
                radius: r,
                terms: terms.len(),
                envelope: ev.envelope,
                critical_exponent: Some(ce),
            })
        }
    }
}

/// `B` with `N_y(r) ≤ B e^{δ r}`: the fitted constant for basepoint `x`,
/// doubled, times `e^{δ d(x,y)}` for the shift of basepoint.
pub(crate) fn counting_constant(ce: &CriticalExponent, delta: f64, d_xy: f64) -> f64 {
    let b = ce
        .counts
        .iter()
        .map(|&(r, n)| n as f64 * (-delta * r).exp())
        .fold(1.0, f64::max);
    2.0 * b * (delta * d_xy).exp()
}

pub(crate) fn complex_sum(terms: &[Complex64]) -> Complex64 {
    let mut acc = crate::quad::ComplexSum::new();
    for &z in terms {
        acc.add(z);
    }
    acc.value()
}
