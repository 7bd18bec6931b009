//! Heat and Schrödinger kernels on rank-one spaces, bound profiles and
//! `L^q(X)` norms.
//!
//! The Schrödinger kernel is the heat kernel continued to the imaginary
//! axis, `s_t = h_{−it}` on the principal branch, so that
//! `S_t = H⁻¹(w_t ·)` with `w_t(λ) = e^{it(λ²+|ρ|²)}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lie_data::{ComplexGroupSpace, Family, RankOneSpace};
use crate::quad::CompensatedSum;
use crate::spherical::{
    euclidean_reduction_gaussian, inverse_transform, phi0, phi0_h3, InverseOptions, OscillatoryMethod,
    RadialFunction, RadialGrid, SpectralMultiplier, TransformMeta,
};

/// `(4πt)^{−3/2} (r/sinh r) e^{−t} e^{−r²/4t}` on H³.
pub fn heat_kernel_exact(t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("heat kernel needs t > 0, got {t}"));
    }
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    Ok((4.0 * PI * t).powf(-1.5) * (-t).exp() * phi0_h3(r) * (-r * r / (4.0 * t)).exp())
}

/// Heat kernel on H² or H³ (closed form on H³, Abel integral on H²).
pub fn heat_kernel(space: &RankOneSpace, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("heat kernel needs t > 0, got {t}"));
    }
    Ok(euclidean_reduction_gaussian(space, Complex64::new(t, 0.0), r)?.re)
}

/// `s_t(exp H) = (4π(−it))^{−n/2} e^{it|ρ|²} φ₀(exp H) e^{−i|H|²/4t}` for `G` complex.
pub fn schrodinger_kernel_exact_at(space: &ComplexGroupSpace, t: f64, h: &[f64]) -> Result<Complex64> {
    if t == 0.0 || !t.is_finite() {
        return domain(format!("Schrödinger kernel needs t != 0, got {t}"));
    }
    let norm2: f64 = h.iter().map(|x| x * x).sum();
    let p0 = space.phi0_at(h)?;
    let a = Complex64::new(0.0, -t);
    let pref = (a * (4.0 * PI)).powf(-(space.n as f64) / 2.0);
    let phase = Complex64::new(0.0, t * space.rho_norm().powi(2)).exp() * Complex64::new(0.0, -norm2 / (4.0 * t)).exp();
    Ok(pref * phase * p0)
}

/// Rank-one complex case (`SL(2,C)`, i.e. H³) at radius `r`.
pub fn schrodinger_kernel_exact_complex(space: &ComplexGroupSpace, t: f64, r: f64) -> Result<Complex64> {
    if space.rank != 1 {
        return domain(format!(
            "{}: radial evaluation needs rank one; use schrodinger_kernel_exact_at with a vector H",
            space.label
        ));
    }
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    schrodinger_kernel_exact_at(space, t, &[r])
}

/// Closed form on H³ without building a `ComplexGroupSpace`.
pub fn schrodinger_kernel_h3(t: f64, r: f64) -> Complex64 {
    euclidean_reduction_gaussian(&RankOneSpace::h3(), Complex64::new(0.0, -t), r).expect("valid H3 arguments")
}

/// `s_t` evaluated pointwise by the best route available: closed form on H³,
/// Abel reduction on H².
pub fn schrodinger_kernel_value(space: &RankOneSpace, t: f64, r: f64) -> Result<Complex64> {
    if t == 0.0 || !t.is_finite() {
        return domain(format!("Schrödinger kernel needs t != 0, got {t}"));
    }
    euclidean_reduction_gaussian(space, Complex64::new(0.0, -t), r)
}

#[derive(Clone, Debug)]
pub struct NumericKernel {
    pub kernel: RadialFunction,
    pub meta: TransformMeta,
}

/// `s_t = H⁻¹(w_t)` on a radial grid using the oscillatory machinery of
/// [`crate::spherical`]. The default method is the ε-ladder on H³ and the
/// Euclidean reduction on H² (see [`default_method`]).
pub fn schrodinger_kernel_numeric(
    space: &RankOneSpace,
    t: f64,
    grid: &RadialGrid,
    method: Option<OscillatoryMethod>,
) -> Result<NumericKernel> {
    if t == 0.0 || !t.is_finite() {
        return domain(format!("Schrödinger kernel needs t != 0, got {t}"));
    }
    let opts = InverseOptions {
        method: method.unwrap_or_else(|| default_method(space)),
        ..InverseOptions::regularized()
    };
    let res = inverse_transform(space, &SpectralMultiplier::schrodinger(t), grid, &opts)?;
    Ok(NumericKernel {
        kernel: res.function,
        meta: res.meta,
    })
}

pub fn default_method(space: &RankOneSpace) -> OscillatoryMethod {
    if space.is_real_hyperbolic(3) {
        OscillatoryMethod::EpsilonLadder
    } else {
        OscillatoryMethod::EuclideanReduction
    }
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    RankOnePsi1,
    ComplexPsi2,
    GlobalPsi,
}

/// Bound shape against which kernels are certified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersiveProfile {
    pub kind: ProfileKind,
    pub n: u32,
    /// Polynomial exponent of `ψ₂`.
    pub a: f64,
    /// Rank-one large-time rate for `Ψ`; complex groups use `n/2`.
    pub rank_one: bool,
    /// Fitted constant, 0 until certified.
    pub c: f64,
}

/// Which `ψ₁` branch a point falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    ShortTime,
    LongTime,
}

impl DispersiveProfile {
    pub fn psi1(n: u32) -> Self {
        Self {
            kind: ProfileKind::RankOnePsi1,
            n,
            a: 0.0,
            rank_one: true,
            c: 0.0,
        }
    }

    pub fn psi2(n: u32, a: f64) -> Self {
        Self {
            kind: ProfileKind::ComplexPsi2,
            n,
            a,
            rank_one: false,
            c: 0.0,
        }
    }

    pub fn global(n: u32, rank_one: bool) -> Self {
        Self {
            kind: ProfileKind::GlobalPsi,
            n,
            a: 0.0,
            rank_one,
            c: 0.0,
        }
    }

    /// `ψ₂` for a complex-group space with `a` fitted from `φ₀`.
    pub fn psi2_for(space: &ComplexGroupSpace) -> Result<(Self, Phi0Fit)> {
        let fit = fit_phi0_bound_complex(space)?;
        Ok((Self::psi2(space.n as u32, fit.a), fit))
    }

    pub fn branch(&self, t: f64, r: f64) -> Branch {
        if t.abs() <= 1.0 + r {
            Branch::ShortTime
        } else {
            Branch::LongTime
        }
    }

    pub fn value(&self, t: f64, r: f64) -> f64 {
        let n = self.n as f64;
        let at = t.abs();
        match self.kind {
            ProfileKind::RankOnePsi1 => match self.branch(t, r) {
                Branch::ShortTime => at.powf(-n / 2.0) * (1.0 + r).powf((n - 1.0) / 2.0),
                Branch::LongTime => at.powf(-1.5) * (1.0 + r),
            },
            ProfileKind::ComplexPsi2 => at.powf(-n / 2.0) * (1.0 + r).powf(self.a),
            ProfileKind::GlobalPsi => global_psi(t, self.n, self.rank_one),
        }
    }
}

/// `Ψ(t)`: `|t|^{−n/2}` for `|t| ≤ 1`, then `|t|^{−3/2}` (rank one) or `|t|^{−n/2}` (complex).
pub fn global_psi(t: f64, n: u32, rank_one: bool) -> f64 {
    let at = t.abs();
    let n = n as f64;
    if at <= 1.0 || !rank_one {
        at.powf(-n / 2.0)
    } else {
        at.powf(-1.5)
    }
}

/// Result of fitting `φ₀(r) ≤ c (1+r)^a e^{−ρ r}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Phi0Fit {
    pub c: f64,
    pub a: f64,
    /// True when the dyadic fit failed and `a = |Σ⁺|` was used.
    pub fallback: bool,
}

fn dyadic_radii() -> Vec<f64> {
    (-4..=6).map(|k| 2f64.powi(k)).collect()
}

/// Fit on the dyadic grid `r = 2^k`: `a` from the log-log slope of
/// `φ₀ e^{ρr}` against `1 + r` over the large radii, then the smallest `c`
/// making the bound hold on the whole grid.
fn fit_phi0(values: &[(f64, f64)], fallback_a: f64) -> Phi0Fit {
    let tail: Vec<(f64, f64)> = values
        .iter()
        .filter(|(r, _)| *r >= 4.0)
        .map(|&(r, v)| ((1.0 + r).ln(), v.ln()))
        .collect();
    let (a, fallback) = match least_squares_slope(&tail) {
        Some((slope, _)) if slope.is_finite() && slope > 0.0 => ((slope * 1e3).ceil() / 1e3, false),
        _ => (fallback_a, true),
    };
    let c = values
        .iter()
        .map(|&(r, v)| v / (1.0 + r).powf(a))
        .fold(0.0, f64::max);
    Phi0Fit { c, a, fallback }
}

/// `φ₀` bound fit on a rank-one space.
pub fn fit_phi0_bound(space: &RankOneSpace) -> Result<Phi0Fit> {
    let values = dyadic_radii()
        .into_iter()
        .map(|r| Ok((r, phi0(space, r)? * (space.rho * r).exp())))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_phi0(&values, 1.0))
}

/// `φ₀` bound fit along the `ρ_m`-minimizing direction of a complex-group
/// space (for `SL(2,C)`, the single ray).
pub fn fit_phi0_bound_complex(space: &ComplexGroupSpace) -> Result<Phi0Fit> {
    let dir = space.rho_m_direction();
    let values = dyadic_radii()
        .into_iter()
        .map(|r| {
            let h: Vec<f64> = dir.iter().map(|x| x * r).collect();
            Ok((r, space.phi0_at(&h)? * (space.rho_m * r).exp()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_phi0(&values, space.positive_root_count() as f64))
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let stderr = if n > 2 {
        let rss: f64 = points
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some((slope, stderr))
}

// ---------------------------------------------------------------------------
// Pointwise certification
// ---------------------------------------------------------------------------

/// Kernel values on a `(t, r)` grid: `values[i][j] = s_{t_i}(r_j)`.
#[derive(Clone, Debug)]
pub struct KernelGrid {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    /// `ρ_m` of the underlying space.
    pub rho_m: f64,
}

impl KernelGrid {
    /// Sample `s_t(r)` pointwise with [`schrodinger_kernel_value`].
    pub fn sample(space: &RankOneSpace, times: &[f64], radii: &[f64]) -> Result<Self> {
        let values = times
            .par_iter()
            .map(|&t| {
                radii
                    .iter()
                    .map(|&r| schrodinger_kernel_value(space, t, r))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: times.to_vec(),
            radii: radii.to_vec(),
            values,
            rho_m: space.rho_m,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundFit {
    /// `c* = max |s_t(r)| / (ψ(t,r) e^{−ρ_m r})`.
    pub c_star: f64,
    pub argmax_t: f64,
    pub argmax_r: f64,
    /// Grid points in the `|t| ≤ 1+r` and `|t| > 1+r` branches.
    pub short_time_points: usize,
    pub long_time_points: usize,
}

impl BoundFit {
    pub fn both_branches(&self) -> bool {
        self.short_time_points > 0 && self.long_time_points > 0
    }
}

pub fn verify_pointwise_bound(kernel: &KernelGrid, profile: &DispersiveProfile) -> Result<BoundFit> {
    if kernel.values.len() != kernel.times.len() || kernel.values.iter().any(|row| row.len() != kernel.radii.len()) {
        return domain("kernel grid shape does not match its time and radius axes");
    }
    let mut fit = BoundFit {
        c_star: 0.0,
        argmax_t: f64::NAN,
        argmax_r: f64::NAN,
        short_time_points: 0,
        long_time_points: 0,
    };
    for (i, &t) in kernel.times.iter().enumerate() {
        for (j, &r) in kernel.radii.iter().enumerate() {
            match profile.branch(t, r) {
                Branch::ShortTime => fit.short_time_points += 1,
                Branch::LongTime => fit.long_time_points += 1,
            }
            let s = kernel.values[i][j].norm();
            if s == 0.0 {
                continue;
            }
            let bound = profile.value(t, r) * (-kernel.rho_m * r).exp();
            if !(bound > 0.0) || !bound.is_finite() {
                return Err(Error::DegenerateProfile(format!(
                    "profile is {bound} at t = {t}, r = {r} where |s_t| = {s:.3e}"
                )));
            }
            let ratio = s / bound;
            if ratio > fit.c_star {
                fit.c_star = ratio;
                fit.argmax_t = t;
                fit.argmax_r = r;
            }
        }
    }
    Ok(fit)
}

// ---------------------------------------------------------------------------
// L^q(X) norms
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LqNorm {
    pub q: f64,
    pub t: f64,
    /// `(ω ∫ |s_t|^q δ dr)^{1/q}`.
    pub value: f64,
    /// Same integral with `δ(r)` replaced by the majorant `e^{2ρr}`.
    pub majorant: f64,
    /// Radial cutoff of the quadrature.
    pub radius: f64,
}

/// Radius past which `(1+r)^{q} e^{−(q−2)ρ r}` is below `1e−12` of its peak.
fn lq_cutoff(space: &RankOneSpace, q: f64) -> f64 {
    let k = (q - 2.0) * space.rho;
    let mut r = 4.0;
    let g = |r: f64| q * (1.0 + r).ln() - k * r;
    let peak = g((q / k - 1.0).max(0.0));
    while g(r) - peak > -12.0 * std::f64::consts::LN_10 && r < 400.0 {
        r += 0.5;
    }
    r
}

/// `‖s_t‖_{L^q(X)}` (closed form on H³, Abel reduction on H²).
pub fn kernel_lq_norm(space: &RankOneSpace, t: f64, q: f64) -> Result<LqNorm> {
    if !(q > 2.0) {
        return domain(format!("kernel L^q norms need q > 2, got {q}"));
    }
    if t == 0.0 || !t.is_finite() {
        return domain(format!("Schrödinger kernel needs t != 0, got {t}"));
    }
    if q.is_infinite() {
        let value = schrodinger_kernel_value(space, t, 0.0)?.norm();
        return Ok(LqNorm {
            q,
            t,
            value,
            majorant: value,
            radius: 0.0,
        });
    }
    let radius = lq_cutoff(space, q);
    // Modulus is smooth; resolve the short-time Gaussian core near 0.
    let points = 1 + 2 * ((radius / 0.02).ceil() as usize / 2);
    let grid = RadialGrid::geometric(radius, points, 2.0)?;
    let moduli: Vec<f64> = grid
        .points()
        .par_iter()
        .map(|&r| schrodinger_kernel_value(space, t, r).map(|v| v.norm()))
        .collect::<Result<_>>()?;
    let (value, majorant) = lq_from_moduli(space, &grid, &moduli, q);
    Ok(LqNorm {
        q,
        t,
        value,
        majorant,
        radius,
    })
}

/// `L^q` norm of an arbitrary sampled kernel, with the `e^{2ρr}` majorant.
pub fn lq_norm_of(f: &RadialFunction, q: f64) -> (f64, f64) {
    let moduli: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    lq_from_moduli(&f.space, &f.grid, &moduli, q)
}

fn lq_from_moduli(space: &RankOneSpace, grid: &RadialGrid, moduli: &[f64], q: f64) -> (f64, f64) {
    let omega = space.volume_constant();
    let mut exact = CompensatedSum::new();
    let mut major = CompensatedSum::new();
    for ((&r, &w), &m) in grid.points().iter().zip(grid.weights()).zip(moduli) {
        let mq = m.powf(q);
        exact.add(w * mq * space.density_unchecked(r));
        major.add(w * mq * (2.0 * space.rho * r).exp());
    }
    ((omega * exact.value()).powf(1.0 / q), (omega * major.value()).powf(1.0 / q))
}

/// Space families whose oscillatory kernels are computed numerically here.
pub fn kernel_supported(space: &RankOneSpace) -> bool {
    space.family == Family::Real && (space.n == 2 || space.n == 3)
}
