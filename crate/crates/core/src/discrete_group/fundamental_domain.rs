//! Fundamental domains and Monte Carlo integration on `Γ\X`.
//!
//! * trivial group: geodesic polar coordinates around the basepoint;
//! * cyclic group: Fermi coordinates `(ρ, θ, s)` along the axis, slab `0 ≤ s < ℓ`;
//! * Schottky group: polar coordinates restricted to the Ford domain.
//!
//! The radial (or axial) coordinate is drawn from a piecewise-constant
//! density fitted to the integrand's profile, with an exponential tail past
//! the table so the estimator stays unbiased.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::automorphic::{complex_sum, counting_constant, KernelEnvelope, KernelEvaluator};
use super::matrix::{distance_unchecked, Mat2, Model, Point};
use super::orbit::{enumerate_orbit, in_ford_domain, OrbitLimits};
use super::poincare::critical_exponent_estimate;
use super::{DiscreteGroup, GroupKind};
use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, CompensatedSum};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    /// Independent RNG streams; results do not depend on the thread count.
    pub batches: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 200_000,
            batches: 16,
            seed: 0x5eed_2024,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McEstimate {
    /// `(∫_F |ŝ_t(x,y)|^q dy)^{1/q}`.
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub stderr: f64,
    pub integral: f64,
    pub integral_stderr: f64,
    pub samples: usize,
    /// Samples that landed in the fundamental domain.
    pub accepted: usize,
    /// Bound on `|ŝ_t|` lost to truncating the orbit sum.
    pub tail_bound: f64,
}

/// Mean and standard error of one integrand.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub stderr: f64,
}

// ---------------------------------------------------------------------------
// Radial proposal
// ---------------------------------------------------------------------------

struct Proposal {
    step: f64,
    r_max: f64,
    cdf: Vec<f64>,
    density: Vec<f64>,
    tail_mass: f64,
    tail_rate: f64,
}

impl Proposal {
    /// Histogram of `target` on `[0, r_max]` (floored at `1e−6` of its
    /// maximum) plus an exponential tail of mass `1e−3`.
    fn new(target: impl Fn(f64) -> f64, r_max: f64) -> Self {
        let bins = 1200usize;
        let step = r_max / bins as f64;
        let raw: Vec<f64> = (0..bins).map(|i| target((i as f64 + 0.5) * step).max(0.0)).collect();
        let peak = raw.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let w: Vec<f64> = raw.iter().map(|&v| v.max(1e-6 * peak)).collect();
        let total: f64 = w.iter().sum();
        let tail_mass = 1e-3;
        // Half the target's decay rate at the end of the table keeps the
        // weights square integrable in the tail.
        let (a, b) = (target(r_max - 1.0), target(r_max));
        let tail_rate = if a > 0.0 && b > 0.0 { (0.5 * (a / b).ln()).clamp(0.05, 2.0) } else { 2.0 };
        let mut acc = 0.0;
        let cdf = w
            .iter()
            .map(|&v| {
                acc += v / total;
                acc
            })
            .collect();
        let density = w.iter().map(|&v| (1.0 - tail_mass) * v / (total * step)).collect();
        Self {
            step,
            r_max,
            cdf,
            density,
            tail_mass,
            tail_rate,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        if u < self.tail_mass {
            let v: f64 = rng.random();
            return self.r_max - (1.0 - v).ln() / self.tail_rate;
        }
        let v: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c < v).min(self.cdf.len() - 1);
        (i as f64 + rng.random::<f64>()) * self.step
    }

    fn pdf(&self, r: f64) -> f64 {
        if r >= self.r_max {
            self.tail_mass * self.tail_rate * (-self.tail_rate * (r - self.r_max)).exp()
        } else {
            self.density[((r / self.step) as usize).min(self.density.len() - 1)]
        }
    }
}

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

enum Chart {
    /// Polar coordinates around `frame·origin`; `ford` restricts to the Ford domain.
    Polar { frame: Mat2, ford: bool },
    /// Fermi coordinates along the axis `P(0, ∞)`; the generator is
    /// `P diag(μ, 1/μ) P⁻¹` with `μ² = e^{ℓ + iθ}`.
    Slab { p: Mat2, ell: f64 },
}

struct Sample {
    y: Point,
    weight: f64,
}

fn translate_to(x: &Point) -> Mat2 {
    let s = x.height().sqrt();
    let shift = match x.model {
        Model::UpperHalfPlane => Complex64::new(x.z.re, 0.0),
        Model::UpperHalfSpace => x.z,
    };
    Mat2::new(s.into(), shift / s, 0.0.into(), (1.0 / s).into())
}

/// Conjugator `P` with `P⁻¹ g P` diagonal, sending `0 ↦ z₋`, `∞ ↦ z₊`, real on H².
pub(crate) fn axis_frame(g: &Mat2, model: Model) -> Result<Mat2> {
    if g.c.norm() < 1e-14 && g.b.norm() < 1e-14 {
        return Ok(Mat2::identity());
    }
    if g.c.norm() < 1e-14 {
        // Fixed points ∞ and b/(d − a).
        let finite = g.b / (g.d - g.a);
        return Ok(Mat2::new(1.0.into(), finite, 0.0.into(), 1.0.into()));
    }
    let tr = g.trace();
    let disc = (tr * tr - 4.0).sqrt();
    let fp1 = (g.a - g.d + disc) / (g.c * 2.0);
    let fp2 = (g.a - g.d - disc) / (g.c * 2.0);
    let (zp, zm) = if model == Model::UpperHalfPlane && fp1.re < fp2.re { (fp2, fp1) } else { (fp1, fp2) };
    let s = (zp - zm).sqrt();
    if !(s.norm() > 0.0) {
        return domain("generator is parabolic; no Fermi slab");
    }
    Ok(Mat2::new(zp / s, zm / s, 1.0 / s, 1.0 / s))
}

impl Chart {
    fn for_group(group: &DiscreteGroup, x: &Point) -> Result<Self> {
        match group.kind {
            GroupKind::Trivial => Ok(Chart::Polar {
                frame: translate_to(x),
                ford: false,
            }),
            GroupKind::Cyclic { ell } => Ok(Chart::Slab {
                p: axis_frame(&group.generators[0], group.model)?,
                ell,
            }),
            GroupKind::Schottky => {
                if !in_ford_domain(group, x) {
                    return domain("basepoint must lie in the Ford domain");
                }
                Ok(Chart::Polar {
                    frame: translate_to(x),
                    ford: true,
                })
            }
            GroupKind::Generic => Err(Error::UnsupportedGroup(format!(
                "{}: no fundamental domain is known for this group",
                group.label
            ))),
        }
    }

    /// Jacobian in the sampled coordinate (radius or distance to the axis).
    fn jacobian(&self, group: &DiscreteGroup, r: f64) -> f64 {
        match (self, group.model) {
            (Chart::Polar { .. }, _) => group.space().volume_density(r),
            (Chart::Slab { ell, .. }, Model::UpperHalfSpace) => 2.0 * std::f64::consts::PI * ell * r.sinh() * r.cosh(),
            (Chart::Slab { ell, .. }, Model::UpperHalfPlane) => 2.0 * ell * r.cosh(),
        }
    }

    fn sample(&self, group: &DiscreteGroup, proposal: &Proposal, rng: &mut ChaCha8Rng) -> Option<Sample> {
        let r = proposal.sample(rng);
        let weight = self.jacobian(group, r) / proposal.pdf(r);
        let y = match (self, group.model) {
            (Chart::Polar { frame, ford }, model) => {
                let k = random_rotation(model, rng);
                let base = match model {
                    Model::UpperHalfPlane => Point::plane(Complex64::new(0.0, r.exp())),
                    Model::UpperHalfSpace => Point::space(Complex64::new(0.0, 0.0), r.exp()),
                };
                let y = (*frame * k).act(&base);
                if *ford && !in_ford_domain(group, &y) {
                    return None;
                }
                y
            }
            (Chart::Slab { p, ell }, Model::UpperHalfSpace) => {
                let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                let es = (ell * rng.random::<f64>()).exp();
                p.act(&Point::space(Complex64::from_polar(es * r.tanh(), theta), es / r.cosh()))
            }
            (Chart::Slab { p, ell }, Model::UpperHalfPlane) => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let es = (ell * rng.random::<f64>()).exp();
                p.act(&Point::plane(Complex64::new(sign * es * r.tanh(), es / r.cosh())))
            }
        };
        if y.check().is_err() {
            return None;
        }
        Some(Sample { y, weight })
    }
}

/// Haar-random rotation about the basepoint `i` / `(0, 1)`.
fn random_rotation(model: Model, rng: &mut ChaCha8Rng) -> Mat2 {
    match model {
        Model::UpperHalfPlane => {
            let phi = std::f64::consts::PI * rng.random::<f64>();
            Mat2::real(phi.cos(), -phi.sin(), phi.sin(), phi.cos())
        }
        Model::UpperHalfSpace => {
            let cos_theta = 2.0 * rng.random::<f64>() - 1.0;
            let half = 0.5 * cos_theta.acos();
            let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let e = Complex64::from_polar(1.0, phi);
            Mat2::new(half.cos().into(), -half.sin() * e.conj(), half.sin() * e, half.cos().into())
        }
    }
}

// ---------------------------------------------------------------------------
// Orbit sums
// ---------------------------------------------------------------------------

/// Lists `d(x, γy)` for all `γ` with `d(x, γy) ≤ cutoff`.
enum Periodizer {
    Trivial,
    Cyclic { x0: Point, p_inv: Mat2, ell: f64, mu2: Complex64 },
    /// Elements with `d(x, γx) ≤ reach`, sorted by that distance; complete
    /// for `d(x,y) + cutoff ≤ reach`.
    List { mats: Vec<(f64, Mat2)>, reach: f64 },
}

impl Periodizer {
    fn new(group: &DiscreteGroup, x: &Point, cutoff: f64, spread: f64) -> Result<Self> {
        match group.kind {
            GroupKind::Trivial => Ok(Self::Trivial),
            GroupKind::Cyclic { ell } => {
                let p = axis_frame(&group.generators[0], group.model)?;
                let p_inv = p.inverse();
                let diag = p_inv * group.generators[0] * p;
                let mu2 = diag.a / diag.d;
                Ok(Self::Cyclic {
                    x0: p_inv.act(x),
                    p_inv,
                    ell,
                    mu2,
                })
            }
            _ => {
                let reach = cutoff + spread;
                let orbit = enumerate_orbit(group, x, x, OrbitLimits::radius(reach))?;
                if !orbit.complete {
                    return Err(Error::Numerical {
                        message: format!("orbit enumeration to radius {reach:.2} exceeded its budget"),
                        residual: f64::NAN,
                    });
                }
                let mut mats: Vec<(f64, Mat2)> = orbit.entries.into_iter().map(|e| (e.distance, e.matrix)).collect();
                mats.sort_by(|a, b| a.0.total_cmp(&b.0));
                Ok(Self::List { mats, reach })
            }
        }
    }

    fn distances(&self, group: &DiscreteGroup, x: &Point, y: &Point, cutoff: f64, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Self::Trivial => out.push(distance_unchecked(x, y)),
            Self::Cyclic { x0, p_inv, ell, mu2 } => {
                let y0 = p_inv.act(y);
                let d0 = distance_unchecked(x0, &y0);
                let kmax = ((cutoff + d0) / ell).floor() as i32 + 1;
                let scale = mu2.norm();
                for k in -kmax..=kmax {
                    let m = mu2.powi(k);
                    let yk = match y0.model {
                        Model::UpperHalfPlane => Point::plane(y0.z * m.re),
                        Model::UpperHalfSpace => Point::space(y0.z * m, y0.h * scale.powi(k)),
                    };
                    out.push(distance_unchecked(x0, &yk));
                }
            }
            Self::List { mats, reach } => {
                let d_xy = distance_unchecked(x, y);
                if d_xy + cutoff <= *reach {
                    // d(x, γy) ≤ cutoff forces d(x, γx) ≤ cutoff + d(x, y).
                    let end = mats.partition_point(|m| m.0 <= cutoff + d_xy);
                    out.extend(mats[..end].iter().map(|m| distance_unchecked(x, &m.1.act(y))));
                } else if let Ok(orbit) = enumerate_orbit(group, x, y, OrbitLimits::radius(cutoff)) {
                    out.extend(orbit.entries.iter().map(|e| e.distance));
                }
            }
        }
    }
}

/// Radius beyond which the orbit-sum remainder of `envelope` is below `tol`,
/// and the corresponding remainder.
fn orbit_cutoff(group: &DiscreteGroup, envelope: &KernelEnvelope, tol: f64) -> Result<(f64, f64)> {
    match group.kind {
        GroupKind::Trivial => Ok((0.0, 0.0)),
        GroupKind::Cyclic { ell } => {
            let mut u = 1.0;
            while envelope.cyclic_tail(ell, u) > tol && u < 400.0 {
                u += 0.5;
            }
            Ok((u, envelope.cyclic_tail(ell, u)))
        }
        _ => {
            let ce = critical_exponent_estimate(group)?;
            let space = group.space();
            if !ce.admits(space.rho_m) {
                return Err(Error::ClassViolation(format!(
                    "{}: critical exponent {:.4} + {:.4} is not below rho_m = {}",
                    group.label, ce.value, ce.half_width, space.rho_m
                )));
            }
            let delta = ce.upper();
            let b = counting_constant(&ce, delta, 0.0);
            let mut r = 1.0;
            while envelope.counting_tail(b, delta, r) > tol && r < 200.0 {
                r += 0.5;
            }
            Ok((r, envelope.counting_tail(b, delta, r)))
        }
    }
}

/// Monte Carlo integrals over the fundamental domain of functions of the
/// truncated orbit distances `{d(x, γy) : d ≤ cutoff}`.
///
/// `profile(r)` shapes the proposal in the sampled coordinate.
pub fn periodized_integrals<F>(
    group: &DiscreteGroup,
    x: &Point,
    cfg: &McConfig,
    profile: impl Fn(f64) -> f64,
    cutoff: f64,
    outputs: usize,
    f: F,
) -> Result<(Vec<Moments>, usize)>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    x.check()?;
    if x.model != group.model {
        return domain("basepoint must lie in the group's model");
    }
    if cfg.samples == 0 || cfg.batches == 0 {
        return domain("Monte Carlo needs at least one sample and one batch");
    }
    let chart = Chart::for_group(group, x)?;
    let spread = match group.model {
        Model::UpperHalfPlane => 20.0,
        Model::UpperHalfSpace => 12.0,
    };
    let proposal = Proposal::new(|r| profile(r) * chart.jacobian(group, r), spread);
    let periodizer = Periodizer::new(group, x, cutoff, spread)?;
    let per_batch = cfg.samples.div_ceil(cfg.batches);

    let batches: Vec<(Vec<(CompensatedSum, CompensatedSum)>, usize)> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let mut acc = vec![(CompensatedSum::new(), CompensatedSum::new()); outputs];
            let mut accepted = 0;
            let mut dist = Vec::new();
            let count = per_batch.min(cfg.samples.saturating_sub(b * per_batch));
            for _ in 0..count {
                let Some(s) = chart.sample(group, &proposal, &mut rng) else {
                    continue;
                };
                accepted += 1;
                periodizer.distances(group, x, &s.y, cutoff, &mut dist);
                for (a, v) in acc.iter_mut().zip(f(&dist)) {
                    let wv = s.weight * v;
                    a.0.add(wv);
                    a.1.add(wv * wv);
                }
            }
            (acc, accepted)
        })
        .collect();

    let n = (per_batch * cfg.batches).min(cfg.samples) as f64;
    let mut accepted = 0;
    let mut sums = vec![(CompensatedSum::new(), CompensatedSum::new()); outputs];
    for (acc, a) in &batches {
        accepted += a;
        for (s, v) in sums.iter_mut().zip(acc) {
            s.0.add(v.0.value());
            s.1.add(v.1.value());
        }
    }
    let moments = sums
        .iter()
        .map(|(s1, s2)| {
            let mean = s1.value() / n;
            let var = (s2.value() / n - mean * mean).max(0.0);
            Moments {
                mean,
                stderr: (var / (n - 1.0).max(1.0)).sqrt(),
            }
        })
        .collect();
    Ok((moments, accepted))
}

/// Proposal profile for `|ŝ_t|^q`: the envelope to the `q`-th power.
fn norm_profile(envelope: KernelEnvelope, q: f64) -> impl Fn(f64) -> f64 {
    move |r| (envelope.at(r) / envelope.k).powf(q)
}

/// `‖ŝ_t(x, ·)‖_{L^q(Γ\X)}` by Monte Carlo on the fundamental domain.
pub fn quotient_lq_norm(group: &DiscreteGroup, t: f64, q: f64, x: &Point, cfg: &McConfig) -> Result<McEstimate> {
    if t == 0.0 || !t.is_finite() {
        return domain(format!("Schrödinger kernel needs t != 0, got {t}"));
    }
    quotient_lq_norm_gaussian(group, Complex64::new(0.0, -t), q, x, cfg)
}

/// As [`quotient_lq_norm`] for the periodized kernel of `e^{−a(λ² + |ρ|²)}`.
pub fn quotient_lq_norm_gaussian(group: &DiscreteGroup, a: Complex64, q: f64, x: &Point, cfg: &McConfig) -> Result<McEstimate> {
    if !(q > 2.0) || !q.is_finite() {
        return domain(format!("quotient norms need 2 < q < inf, got {q}"));
    }
    let space = group.space();
    let probe = KernelEvaluator::gaussian(&space, a, 1.0)?;
    let rel = if matches!(group.kind, GroupKind::Trivial | GroupKind::Cyclic { .. }) { 1e-12 } else { 1e-6 };
    let (cutoff, tail) = orbit_cutoff(group, &probe.envelope, rel * probe.envelope.k)?;
    let ev = if space.is_real_hyperbolic(3) { probe } else { KernelEvaluator::gaussian(&space, a, cutoff + 24.0)? };
    let (m, accepted) = periodized_integrals(group, x, cfg, norm_profile(ev.envelope, q), cutoff, 1, |d| {
        let terms: Vec<Complex64> = d.iter().map(|&r| ev.eval(r)).collect();
        vec![complex_sum(&terms).norm().powf(q)]
    })?;
    let integral = m[0].mean;
    let value = integral.powf(1.0 / q);
    Ok(McEstimate {
        value,
        stderr: if integral > 0.0 { m[0].stderr * value / (q * integral) } else { 0.0 },
        integral,
        integral_stderr: m[0].stderr,
        samples: cfg.samples,
        accepted,
        tail_bound: tail,
    })
}

/// Truncation radius and remainder bound for orbit sums of `envelope`
/// at relative tolerance `rel`.
pub fn orbit_sum_cutoff(group: &DiscreteGroup, envelope: &KernelEnvelope, rel: f64) -> Result<(f64, f64)> {
    orbit_cutoff(group, envelope, rel * envelope.k)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnfoldingCheck {
    /// `∫_F Σ_γ F(γy) dy` by Monte Carlo.
    pub quotient: f64,
    pub stderr: f64,
    /// `∫_X F` by radial quadrature.
    pub whole: f64,
    pub relative_error: f64,
    /// `|quotient − whole| / stderr`.
    pub sigmas: f64,
}

/// Unfolding identity for the Gaussian bump `F(y) = e^{−d(x,y)²}`.
pub fn unfolding_check(group: &DiscreteGroup, x: &Point, cfg: &McConfig) -> Result<UnfoldingCheck> {
    let space = group.space();
    let whole = adaptive(|r| space.volume_density(r) * (-r * r).exp(), 0.0, 12.0, 1e-15, 1e-13, 4000)?.value;
    let cutoff = 7.0;
    let (m, _) = periodized_integrals(group, x, cfg, |r| (-r * r).exp(), cutoff, 1, |d| {
        let mut acc = CompensatedSum::new();
        for &r in d {
            acc.add((-r * r).exp());
        }
        vec![acc.value()]
    })?;
    let quotient = m[0].mean;
    Ok(UnfoldingCheck {
        quotient,
        stderr: m[0].stderr,
        whole,
        relative_error: (quotient - whole).abs() / whole,
        sigmas: (quotient - whole).abs() / m[0].stderr.max(f64::MIN_POSITIVE),
    })
}
