//! Spherical functions, Plancherel densities and the spherical Fourier
//! transform of radial (`K`-bi-invariant) functions.
//!
//! Conventions:
//!
//! * forward: `Hf(λ) = ∫_X f φ_λ dvol = ω ∫₀^∞ f(r) φ_λ(r) δ(r) dr`;
//! * inverse: `f(r) = ∫₀^∞ Hf(λ) φ_λ(r) ν(λ) dλ` with the absolute Plancherel
//!   density `ν` returned by [`plancherel_density`].
//!
//! With these constants the heat multiplier `e^{-t(λ²+ρ²)}` inverts to the
//! heat kernel of unit mass, which is how the normalization is pinned.
//!
//! Oscillatory Gaussian multipliers `e^{-a(λ²+ρ²)}` with `Re a = 0` are not
//! absolutely integrable. They are evaluated by analytic continuation in the
//! time variable: the multiplier is damped to `a + ε` on a halving ladder of
//! `ε` and the results are Richardson-extrapolated to `ε = 0`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lie_data::{ComplexGroupSpace, Family, RankOneSpace};
use crate::quad::{self, gl16, integrate_breakpoints_complex, ComplexSum, GaussLegendre};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

// ---------------------------------------------------------------------------
// Radial grids and functions
// ---------------------------------------------------------------------------

/// Strictly increasing radii starting at 0, with composite-Simpson weights
/// for `∫₀^{r_N} g(r) dr`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.len() < 3 {
            return domain("a radial grid needs at least three points");
        }
        if r[0] != 0.0 {
            return domain(format!("radial grid must start at 0, starts at {}", r[0]));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) || r.iter().any(|x| !x.is_finite()) {
            return domain("radial grid must be finite and strictly increasing");
        }
        let weights = simpson_weights(&r);
        Ok(Self { r, weights })
    }

    pub fn uniform(r_max: f64, points: usize) -> Result<Self> {
        if !(r_max > 0.0) || points < 3 {
            return domain("uniform grid needs r_max > 0 and at least 3 points");
        }
        let h = r_max / (points - 1) as f64;
        Self::new((0..points).map(|j| j as f64 * h).collect())
    }

    /// Grid `r_j = R (e^{κ j/N} − 1)/(e^κ − 1)`: spacing grows geometrically
    /// away from the origin.
    pub fn geometric(r_max: f64, points: usize, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Self::uniform(r_max, points);
        }
        if !(r_max > 0.0) || points < 3 {
            return domain("geometric grid needs r_max > 0 and at least 3 points");
        }
        let n = (points - 1) as f64;
        let denom = kappa.exp_m1();
        let mut r: Vec<f64> = (0..points)
            .map(|j| r_max * (kappa * j as f64 / n).exp_m1() / denom)
            .collect();
        r[points - 1] = r_max;
        Self::new(r)
    }

    /// `r ∈ [0, 12]`, 2048 points, geometric refinement near 0.
    pub fn default_grid() -> Self {
        Self::geometric(12.0, 2048, 3.0).expect("default grid parameters are valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Rebuild weights after deserialization.
    pub fn restore(self) -> Result<Self> {
        Self::new(self.r)
    }
}

/// Composite Simpson weights on an arbitrary increasing grid; an odd
/// interval count is closed with a quadratic over the last three points.
fn simpson_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len() - 1;
    let mut w = vec![0.0; x.len()];
    let pairs = n / 2;
    for k in 0..pairs {
        let i = 2 * k;
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let s = h0 + h1;
        w[i] += s / 6.0 * (2.0 - h1 / h0);
        w[i + 1] += s * s * s / (6.0 * h0 * h1);
        w[i + 2] += s / 6.0 * (2.0 - h0 / h1);
    }
    if n % 2 == 1 {
        let i = n - 2;
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        w[i] += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        w[i + 1] += h1 * (h1 + 3.0 * h0) / (6.0 * h0);
        w[i + 2] += h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
    }
    w
}

/// A `K`-bi-invariant function sampled on a radial grid.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    pub space: RankOneSpace,
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
    pub singular_at_origin: bool,
}

impl RadialFunction {
    pub fn new(space: RankOneSpace, grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        Self::build(space, grid, values, false)
    }

    pub fn singular(space: RankOneSpace, grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        Self::build(space, grid, values, true)
    }

    fn build(space: RankOneSpace, grid: RadialGrid, values: Vec<Complex64>, singular: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "{} values supplied for a grid of {} points",
                values.len(),
                grid.len()
            ));
        }
        let start = usize::from(singular);
        if values[start..].iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return domain("radial function values must be finite");
        }
        Ok(Self {
            space,
            grid,
            values,
            singular_at_origin: singular,
        })
    }

    pub fn from_fn(space: RankOneSpace, grid: RadialGrid, f: impl Fn(f64) -> Complex64 + Sync) -> Result<Self> {
        let values = grid.points().par_iter().map(|&r| f(r)).collect();
        Self::new(space, grid, values)
    }

    pub fn from_real_fn(space: RankOneSpace, grid: RadialGrid, f: impl Fn(f64) -> f64 + Sync) -> Result<Self> {
        Self::from_fn(space, grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn zeros(space: RankOneSpace, grid: RadialGrid) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self {
            space,
            grid,
            values,
            singular_at_origin: false,
        }
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    /// Cubic Lagrange interpolation; zero beyond the last grid point.
    pub fn eval(&self, r: f64) -> Complex64 {
        interpolate(self.grid.points(), &self.values, r)
    }

    /// `∫_X g(|f|) dvol` over the grid.
    pub fn integrate_volume(&self, g: impl Fn(Complex64, f64) -> f64) -> f64 {
        let omega = self.space.volume_constant();
        let mut acc = quad::CompensatedSum::new();
        for ((&r, &w), &v) in self.grid.points().iter().zip(self.grid.weights()).zip(&self.values) {
            if w != 0.0 {
                let dens = self.space.density_unchecked(r);
                if dens != 0.0 {
                    acc.add(w * g(v, r) * dens);
                }
            }
        }
        omega * acc.value()
    }

    /// `‖f‖_{L^q(X)}` with respect to the Riemannian volume.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        self.integrate_volume(|v, _| v.norm().powf(q)).powf(1.0 / q)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lq_norm(2.0)
    }

    /// `∫ f φ₀ dvol`, the mass preserved by a transform roundtrip.
    pub fn spherical_mass(&self) -> Result<Complex64> {
        let omega = self.space.volume_constant();
        let mut acc = ComplexSum::new();
        for ((&r, &w), &v) in self.grid.points().iter().zip(self.grid.weights()).zip(&self.values) {
            let dens = self.space.density_unchecked(r);
            if dens != 0.0 {
                acc.add(v * (w * phi0(&self.space, r)? * dens));
            }
        }
        Ok(acc.value() * omega)
    }
}

pub(crate) fn interpolate(x: &[f64], y: &[Complex64], r: f64) -> Complex64 {
    let n = x.len();
    if r <= x[0] {
        return y[0];
    }
    if r > x[n - 1] {
        return Complex64::new(0.0, 0.0);
    }
    let idx = match x.binary_search_by(|v| v.total_cmp(&r)) {
        Ok(i) => return y[i],
        Err(i) => i,
    };
    let lo = idx.saturating_sub(2).min(n.saturating_sub(4));
    let hi = (lo + 4).min(n);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in lo..hi {
        let mut l = 1.0;
        for j in lo..hi {
            if i != j {
                l *= (r - x[j]) / (x[i] - x[j]);
            }
        }
        acc += y[i] * l;
    }
    acc
}

// ---------------------------------------------------------------------------
// Spherical functions
// ---------------------------------------------------------------------------

/// Basic spherical function `φ₀(r)`.
pub fn phi0(space: &RankOneSpace, r: f64) -> Result<f64> {
    Ok(phi_lambda(space, Complex64::new(0.0, 0.0), r)?.re)
}

/// Elementary spherical function `φ_λ(r)` for complex `λ`.
///
/// H³ uses the closed form `sin(λr)/(λ sinh r)`, H² the Mehler integral,
/// other real hyperbolic spaces the `K`-integral representation, and the
/// remaining families the radial eigenfunction ODE (best effort).
pub fn phi_lambda(space: &RankOneSpace, lambda: Complex64, r: f64) -> Result<Complex64> {
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    if r == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    match (space.family, space.n) {
        (Family::Real, 3) => Ok(phi_h3(lambda, r)),
        (Family::Real, 2) => Ok(phi_h2_mehler(lambda, r)),
        (Family::Real, _) => phi_real_integral(space, lambda, r),
        _ => Ok(phi_ode(space, lambda, r)),
    }
}

pub fn phi_lambda_real(space: &RankOneSpace, lambda: f64, r: f64) -> Result<Complex64> {
    phi_lambda(space, Complex64::new(lambda, 0.0), r)
}

/// `φ_{iμ}(r)` for real `μ`: the spherical function at imaginary spectral
/// parameter, real-valued and `≥ φ₀`.
pub fn phi_imaginary(space: &RankOneSpace, mu: f64, r: f64) -> Result<f64> {
    Ok(phi_lambda(space, Complex64::new(0.0, mu), r)?.re)
}

fn phi_h3(lambda: Complex64, r: f64) -> Complex64 {
    let x = lambda * r;
    // sin(x)/x, with a series near the origin.
    let sinc = if x.norm() < 1e-4 {
        let x2 = x * x;
        Complex64::new(1.0, 0.0) - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    };
    sinc * (r / r.sinh())
}

/// Exact `φ₀` on H³.
pub fn phi0_h3(r: f64) -> f64 {
    if r < 1e-8 {
        1.0 - r * r / 6.0
    } else {
        r / r.sinh()
    }
}

/// `φ_λ(r) = (√2/π) ∫₀^r cos(λs) / √(cosh r − cosh s) ds`, with `s = r − w²`.
fn phi_h2_mehler(lambda: Complex64, r: f64) -> Complex64 {
    let sr = r.sqrt();
    let panels = ((lambda.re.abs() * r + lambda.im.abs() * r) / 4.0).ceil() as usize + 2;
    let rule = gl16();
    let mut acc = ComplexSum::new();
    let h = sr / panels as f64;
    for k in 0..panels {
        let lo = k as f64 * h;
        for (w, wt) in rule.mapped(lo, lo + h) {
            let w2 = w * w;
            let denom = (2.0 * (r - 0.5 * w2).sinh() * (0.5 * w2).sinh()).sqrt();
            if denom > 0.0 {
                let s = r - w2;
                acc.add((lambda * s).cos() * (2.0 * w * wt / denom));
            }
        }
    }
    acc.value() * (SQRT_2 / PI)
}

/// Real hyperbolic `H^n`:
/// `φ_λ(r) = c_n ∫₀^π (cosh r − sinh r cos θ)^{−(ρ+iλ)} sin^{n−2}θ dθ`.
pub fn phi_real_integral(space: &RankOneSpace, lambda: Complex64, r: f64) -> Result<Complex64> {
    if space.family != Family::Real {
        return Err(Error::UnsupportedSpace(format!(
            "{space}: the K-integral representation is implemented for real hyperbolic spaces"
        )));
    }
    let m = space.n as i32 - 2;
    let exponent = -(Complex64::new(space.rho, 0.0) + I * lambda);
    let (ch, sh) = (r.cosh(), r.sinh());
    let f = |theta: f64| {
        let base = ch - sh * theta.cos();
        (exponent * base.ln()).exp() * theta.sin().powi(m)
    };
    let est = quad::adaptive(f, 0.0, PI, 1e-14, 1e-12, 20_000)?;
    let norm = quad::adaptive(|t: f64| t.sin().powi(m), 0.0, PI, 1e-15, 1e-14, 1000)?.value;
    Ok(est.value * (1.0 / norm))
}

/// RK4 integration of `φ'' + (m_α coth r + 2 m_2α coth 2r) φ' + (λ² + ρ²) φ = 0`.
fn phi_ode(space: &RankOneSpace, lambda: Complex64, r: f64) -> Complex64 {
    let c = lambda * lambda + space.rho * space.rho;
    let n = space.n as f64;
    let r0 = r.min(1e-3);
    let mut y = Complex64::new(1.0, 0.0) - c * (r0 * r0 / (2.0 * n));
    let mut dy = -c * (r0 / n);
    if r <= r0 {
        return y;
    }
    let ma = space.m_alpha as f64;
    let m2 = space.m_2alpha as f64;
    let drift = |s: f64| ma / s.tanh() + 2.0 * m2 / (2.0 * s).tanh();
    let steps = (((r - r0) / 2e-3).ceil() as usize).max(8);
    let h = (r - r0) / steps as f64;
    let mut s = r0;
    let rhs = |s: f64, y: Complex64, dy: Complex64| (dy, -dy * drift(s) - c * y);
    for _ in 0..steps {
        let (k1y, k1d) = rhs(s, y, dy);
        let (k2y, k2d) = rhs(s + 0.5 * h, y + k1y * (0.5 * h), dy + k1d * (0.5 * h));
        let (k3y, k3d) = rhs(s + 0.5 * h, y + k2y * (0.5 * h), dy + k2d * (0.5 * h));
        let (k4y, k4d) = rhs(s + h, y + k3y * h, dy + k3d * h);
        y += (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0);
        dy += (k1d + k2d * 2.0 + k3d * 2.0 + k4d) * (h / 6.0);
        s += h;
    }
    y
}

// ---------------------------------------------------------------------------
// Plancherel density and spectral grids
// ---------------------------------------------------------------------------

/// Absolute Plancherel density `ν(λ)` (the `|c(λ)|^{-2}` factor including the
/// inversion constant). Certified on H² and H³ only.
pub fn plancherel_density(space: &RankOneSpace, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return domain(format!("spectral parameter must be nonnegative, got {lambda}"));
    }
    match (space.family, space.n) {
        (Family::Real, 3) => Ok(lambda * lambda / (2.0 * PI * PI)),
        (Family::Real, 2) => Ok(lambda * (PI * lambda).tanh() / (2.0 * PI)),
        _ => Err(Error::UnsupportedSpace(format!(
            "{space}: the Plancherel density is certified on H2(R) and H3(R) only"
        ))),
    }
}

/// Composite Gauss–Legendre nodes on `[0, Λ]`.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    pub lambda: Vec<f64>,
    pub weights: Vec<f64>,
    pub lambda_max: f64,
}

impl SpectralGrid {
    pub fn new(lambda_max: f64, panels: usize) -> Result<Self> {
        if !(lambda_max > 0.0) || panels == 0 {
            return domain("spectral grid needs lambda_max > 0 and at least one panel");
        }
        let rule = gl16();
        let h = lambda_max / panels as f64;
        let mut lambda = Vec::with_capacity(panels * rule.len());
        let mut weights = Vec::with_capacity(panels * rule.len());
        for k in 0..panels {
            let lo = k as f64 * h;
            for (x, w) in rule.mapped(lo, lo + h) {
                lambda.push(x);
                weights.push(w);
            }
        }
        Ok(Self {
            lambda,
            weights,
            lambda_max,
        })
    }

    /// Panels narrow enough to resolve `φ_λ(r)` for `r ≤ r_max`.
    pub fn for_radius(lambda_max: f64, r_max: f64) -> Result<Self> {
        let panels = (lambda_max * (r_max + 1.0) / 3.0).ceil() as usize;
        Self::new(lambda_max, panels.max(4))
    }
}

/// Values of a spectral function on a [`SpectralGrid`].
#[derive(Clone, Debug)]
pub struct SpectralSamples {
    pub grid: SpectralGrid,
    pub values: Vec<Complex64>,
}

/// A function of the spectral parameter, extended evenly to `λ < 0`.
#[derive(Clone)]
pub enum SpectralMultiplier {
    /// `amplitude · e^{−a(λ² + |ρ|²)}`, `Re a ≥ 0`, `a ≠ 0`. The heat
    /// multiplier is `a = t`, the Schrödinger multiplier `w_t` is `a = −it`.
    Gaussian { amplitude: Complex64, a: Complex64 },
    /// A closure, assumed absolutely integrable against the Plancherel density.
    Function(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
    Samples(SpectralSamples),
}

impl std::fmt::Debug for SpectralMultiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Gaussian { amplitude, a } => write!(f, "Gaussian {{ amplitude: {amplitude}, a: {a} }}"),
            Self::Function(_) => f.write_str("Function(..)"),
            Self::Samples(s) => write!(f, "Samples({} nodes)", s.values.len()),
        }
    }
}

impl SpectralMultiplier {
    pub fn heat(t: f64) -> Self {
        Self::Gaussian {
            amplitude: Complex64::new(1.0, 0.0),
            a: Complex64::new(t, 0.0),
        }
    }

    /// `w_t(λ) = e^{it|ρ|²} e^{itλ²}`.
    pub fn schrodinger(t: f64) -> Self {
        Self::Gaussian {
            amplitude: Complex64::new(1.0, 0.0),
            a: Complex64::new(0.0, -t),
        }
    }

    pub fn function(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        match self {
            Self::Gaussian { amplitude, a } => Self::Gaussian {
                amplitude: amplitude * c,
                a: *a,
            },
            Self::Function(f) => {
                let f = Arc::clone(f);
                Self::Function(Arc::new(move |l| f(l) * c))
            }
            Self::Samples(s) => Self::Samples(SpectralSamples {
                grid: s.grid.clone(),
                values: s.values.iter().map(|v| v * c).collect(),
            }),
        }
    }

    /// Evaluate at `λ` (even extension). `Samples` cannot be evaluated off-grid.
    pub fn eval(&self, space: &RankOneSpace, lambda: f64) -> Option<Complex64> {
        let l = lambda.abs();
        match self {
            Self::Gaussian { amplitude, a } => Some(amplitude * (-a * (l * l + space.rho * space.rho)).exp()),
            Self::Function(f) => Some(f(l)),
            Self::Samples(_) => None,
        }
    }

    fn is_oscillatory(&self) -> bool {
        matches!(self, Self::Gaussian { a, .. } if a.re <= 1e-15 * a.norm())
    }
}

// ---------------------------------------------------------------------------
// Forward transform
// ---------------------------------------------------------------------------

/// `Hf(λ) = ω ∫ f(r) φ_λ(r) δ(r) dr`, evaluated on the nodes of `lambdas`.
pub fn forward_transform(f: &RadialFunction, lambdas: &SpectralGrid) -> Result<SpectralSamples> {
    let space = f.space;
    let r = f.grid.points();
    let w = f.grid.weights();
    check_integrable(f)?;
    let omega = space.volume_constant();
    let weighted: Vec<Complex64> = r
        .iter()
        .zip(w)
        .zip(&f.values)
        .map(|((&ri, &wi), &v)| v * (wi * space.density_unchecked(ri)))
        .collect();
    let values = lambdas
        .lambda
        .par_iter()
        .map(|&l| {
            let mut acc = ComplexSum::new();
            for (j, &ri) in r.iter().enumerate() {
                if weighted[j] != Complex64::new(0.0, 0.0) {
                    acc.add(weighted[j] * phi_lambda_real(&space, l, ri)?);
                }
            }
            Ok(acc.value() * omega)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralSamples {
        grid: lambdas.clone(),
        values,
    })
}

/// Rejects inputs whose `φ₀`-weighted integrand has not decayed by the end of the grid.
fn check_integrable(f: &RadialFunction) -> Result<()> {
    let r = f.grid.points();
    let mags: Vec<f64> = r
        .iter()
        .zip(&f.values)
        .map(|(&ri, v)| {
            let p0 = if f.space.is_real_hyperbolic(3) {
                phi0_h3(ri)
            } else {
                (-f.space.rho * ri).exp() * (1.0 + ri)
            };
            v.norm() * p0 * f.space.density_unchecked(ri)
        })
        .collect();
    let peak = mags.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let tail_start = r.len() - (r.len() / 20).max(2);
    let tail = mags[tail_start..].iter().copied().fold(0.0, f64::max);
    if tail > 1e-6 * peak {
        return Err(Error::Divergence(format!(
            "integrand |f| φ₀ δ has not decayed on [0, {}]: tail/peak = {:.3e}",
            f.grid.r_max(),
            tail / peak
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Inverse transform
// ---------------------------------------------------------------------------

/// How oscillatory multipliers are continued.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OscillatoryMethod {
    /// Damp `a → a + ε` on a halving ladder and Richardson-extrapolate.
    EpsilonLadder,
    /// Rank-one Euclidean reduction: closed-form Gaussian Fourier pair via a
    /// contour rotation, followed by the inverse Abel transform.
    EuclideanReduction,
}

#[derive(Clone, Copy, Debug)]
pub struct LadderConfig {
    /// `ε₀ = scale · min(|a|, 4|a|²/max(r², 1))`.
    pub scale: f64,
    pub rungs: usize,
    /// Maximum accepted difference between the two best extrapolants, relative.
    pub tolerance: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            scale: 0.15,
            rungs: 7,
            tolerance: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InverseOptions {
    /// Required for oscillatory multipliers.
    pub regularize: bool,
    pub method: OscillatoryMethod,
    pub ladder: LadderConfig,
    /// Relative size of the discarded Gaussian tail.
    pub tail_tolerance: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self {
            regularize: false,
            method: OscillatoryMethod::EpsilonLadder,
            ladder: LadderConfig::default(),
            tail_tolerance: 1e-14,
        }
    }
}

impl InverseOptions {
    pub fn regularized() -> Self {
        Self {
            regularize: true,
            ..Self::default()
        }
    }
}

/// Provenance of an inverse transform, serialized into the CSV sidecar.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TransformMeta {
    pub space: String,
    pub grid: GridSummary,
    /// Largest spectral truncation `Λ` used.
    pub truncation: f64,
    /// Ladder used at the outermost radius (empty when no ladder was needed).
    pub epsilon_ladder: Vec<f64>,
    /// Largest Richardson residual over the grid, relative to the value.
    pub ladder_residual: f64,
    pub method: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GridSummary {
    pub points: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl GridSummary {
    pub fn of(grid: &RadialGrid) -> Self {
        Self {
            points: grid.len(),
            r_min: grid.points()[0],
            r_max: grid.r_max(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InverseResult {
    pub function: RadialFunction,
    pub meta: TransformMeta,
}

/// `(H⁻¹m)(r) = ∫₀^∞ m(λ) φ_λ(r) ν(λ) dλ` on the radii of `grid`.
pub fn inverse_transform(
    space: &RankOneSpace,
    m: &SpectralMultiplier,
    grid: &RadialGrid,
    opts: &InverseOptions,
) -> Result<InverseResult> {
    plancherel_density(space, 0.0)?;
    let mut meta = TransformMeta {
        space: space.label(),
        grid: GridSummary::of(grid),
        ..TransformMeta::default()
    };
    let values: Vec<Complex64> = match m {
        SpectralMultiplier::Samples(s) => {
            meta.truncation = s.grid.lambda_max;
            meta.method = "spectral-samples".into();
            let dens: Vec<Complex64> = s
                .grid
                .lambda
                .iter()
                .zip(&s.grid.weights)
                .zip(&s.values)
                .map(|((&l, &w), &v)| Ok(v * (w * plancherel_density(space, l)?)))
                .collect::<Result<_>>()?;
            grid.points()
                .par_iter()
                .map(|&r| {
                    let mut acc = ComplexSum::new();
                    for (&l, &d) in s.grid.lambda.iter().zip(&dens) {
                        acc.add(d * phi_lambda_real(space, l, r)?);
                    }
                    Ok(acc.value())
                })
                .collect::<Result<_>>()?
        }
        SpectralMultiplier::Function(f) => {
            meta.method = "adaptive-quadrature".into();
            let lmax = function_truncation(space, f.as_ref(), opts.tail_tolerance);
            meta.truncation = lmax;
            grid.points()
                .par_iter()
                .map(|&r| {
                    let g = |l: f64| f(l) * plancherel_density(space, l).unwrap_or(0.0) * phi_lambda_real(space, l, r).unwrap_or_default();
                    let breaks = breakpoints(lmax, |_| r + 1.0, 8.0);
                    let mut acc = ComplexSum::new();
                    for pair in breaks.windows(2) {
                        let est = quad::adaptive(g, pair[0], pair[1], 1e-16, 1e-13, 2000)?;
                        acc.add(est.value);
                    }
                    Ok(acc.value())
                })
                .collect::<Result<_>>()?
        }
        SpectralMultiplier::Gaussian { amplitude, a } => {
            if a.norm() == 0.0 || a.re < -1e-15 * a.norm() {
                return domain(format!("Gaussian multiplier needs Re a >= 0 and a != 0, got a = {a}"));
            }
            if m.is_oscillatory() {
                if !opts.regularize {
                    return Err(Error::Refused(
                        "oscillatory multiplier e^{-a(λ²+ρ²)} with Re a = 0 is not absolutely integrable; \
                         set InverseOptions::regularize (epsilon ladder or Euclidean reduction)"
                            .into(),
                    ));
                }
                return oscillatory_inverse(space, *amplitude, *a, grid, opts, meta);
            }
            let lmax = gaussian_truncation(*a, opts.tail_tolerance);
            meta.truncation = lmax;
            if space.is_real_hyperbolic(3) {
                meta.method = "steepest-descent-contour".into();
                grid.points()
                    .par_iter()
                    .map(|&r| h3_gaussian_saddle(*a, r) * amplitude)
                    .collect()
            } else {
                meta.method = "gaussian-quadrature".into();
                grid.points()
                    .par_iter()
                    .map(|&r| gaussian_lambda_integral(space, *a, r, lmax).map(|v| v * amplitude))
                    .collect::<Result<_>>()?
            }
        }
    };
    let function = RadialFunction::new(*space, grid.clone(), values)?;
    Ok(InverseResult { function, meta })
}

fn gaussian_truncation(a: Complex64, tail_tol: f64) -> f64 {
    // e^{-Re(a) Λ²} ≤ tail_tol, with headroom for the polynomial Plancherel weight.
    ((-tail_tol.ln() + 4.0) / a.re).sqrt()
}

fn function_truncation(space: &RankOneSpace, f: &(dyn Fn(f64) -> Complex64 + Send + Sync), tail_tol: f64) -> f64 {
    let scan: Vec<f64> = (0..=400).map(|k| 0.05 * k as f64).collect();
    let peak = scan
        .iter()
        .map(|&l| f(l).norm() * plancherel_density(space, l).unwrap_or(0.0))
        .fold(0.0, f64::max);
    let mut lmax = 4.0;
    while lmax < 4096.0 {
        let window_max = (0..32)
            .map(|k| lmax * (1.0 + k as f64 / 32.0))
            .map(|l| f(l).norm() * plancherel_density(space, l).unwrap_or(0.0) * l)
            .fold(0.0, f64::max);
        if window_max <= tail_tol * peak.max(f64::MIN_POSITIVE) {
            break;
        }
        lmax *= 2.0;
    }
    lmax
}

/// Breakpoints on `[0, Λ]` so each panel spans at most `phase` radians of
/// the local frequency `freq(λ)`.
fn breakpoints(lmax: f64, freq: impl Fn(f64) -> f64, phase: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut l = 0.0;
    while l < lmax {
        // The frequency grows along the panel, so size it from the right end.
        let w0 = (phase / freq(l).max(1e-3)).min(lmax / 4.0);
        let width = (phase / freq(l + w0).max(1e-3)).min(w0).max(lmax * 1e-9);
        l = (l + width).min(lmax);
        breaks.push(l);
    }
    breaks
}

/// `∫₀^Λ e^{−a(λ²+ρ²)} φ_λ(r) ν(λ) dλ` for `Re a > 0`.
fn gaussian_lambda_integral(space: &RankOneSpace, a: Complex64, r: f64, lmax: f64) -> Result<Complex64> {
    let rho2 = space.rho * space.rho;
    let prefactor = (-a * rho2).exp();
    let breaks = breakpoints(lmax, |l| 2.0 * a.im.abs() * l + r + 1.0, 8.0);
    let rule: &GaussLegendre = gl16();
    let is_h3 = space.is_real_hyperbolic(3);
    let h3_scale = if r > 0.0 { 1.0 / (2.0 * PI * PI * r.sinh()) } else { 0.0 };
    let value = if is_h3 && r > 0.0 {
        // φ_λ ν = λ sin(λr) / (2π² sinh r)
        integrate_breakpoints_complex(rule, &breaks, |l| (-a * (l * l)).exp() * (l * (l * r).sin() * h3_scale))
    } else {
        let failure = std::cell::RefCell::new(None);
        let v = integrate_breakpoints_complex(rule, &breaks, |l| {
            let phi = match phi_lambda_real(space, l, r) {
                Ok(p) => p,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            };
            (-a * (l * l)).exp() * phi * plancherel_density(space, l).unwrap_or(0.0)
        });
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        v
    };
    Ok(value * prefactor)
}

/// H³ heat-type integral on the steepest-descent contour.
///
/// The integrand `λ sin(λr) e^{−aλ²}` is entire and even in λ, so
/// `∫₀^∞ = (2i)⁻¹ ∫_ℝ λ e^{−aλ² + iλr} dλ`; the line is moved through the
/// saddle `λ* = ir/2a` along `λ = λ* + s e^{−i arg(a)/2}`, where the exponent
/// becomes `−|a|s² − r²/4a`. No cancellation remains, so deep Gaussian tails
/// keep full relative accuracy.
fn h3_gaussian_saddle(a: Complex64, r: f64) -> Complex64 {
    let u = Complex64::from_polar(1.0, -0.5 * a.arg());
    let mag = a.norm();
    let smax = (80.0 / mag).sqrt();
    let rule = gl16();
    let pref = (-a).exp();
    if r < 1e-8 {
        // (2π²)⁻¹ ∫₀^∞ λ² e^{−aλ²} dλ with λ = s u.
        let moment = quad::composite(rule, 0.0, smax, 8, |s: f64| Complex64::new(s * s * (-mag * s * s).exp(), 0.0));
        return pref * moment * u * u * u / (2.0 * PI * PI);
    }
    let center = I * r / (a * 2.0);
    let integral = quad::composite(rule, -smax, smax, 16, |s: f64| (center + u * s) * (-mag * s * s).exp());
    pref * integral * u * (-(r * r) / (a * 4.0)).exp() / (I * 4.0 * PI * PI * r.sinh())
}

fn oscillatory_inverse(
    space: &RankOneSpace,
    amplitude: Complex64,
    a: Complex64,
    grid: &RadialGrid,
    opts: &InverseOptions,
    mut meta: TransformMeta,
) -> Result<InverseResult> {
    let values: Vec<Complex64> = match opts.method {
        OscillatoryMethod::EuclideanReduction => {
            meta.method = "euclidean-reduction".into();
            grid.points()
                .par_iter()
                .map(|&r| euclidean_reduction_gaussian(space, a, r).map(|v| v * amplitude))
                .collect::<Result<_>>()?
        }
        OscillatoryMethod::EpsilonLadder => {
            meta.method = "epsilon-ladder".into();
            let results: Vec<(Complex64, f64, f64, Vec<f64>)> = grid
                .points()
                .par_iter()
                .map(|&r| ladder_point(space, a, r, &opts.ladder, opts.tail_tolerance))
                .collect::<Result<_>>()?;
            let mut worst = 0.0f64;
            for (v, res, lmax, ladder) in &results {
                let rel = res / v.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                meta.truncation = meta.truncation.max(*lmax);
                if meta.epsilon_ladder.is_empty() || ladder[0] < meta.epsilon_ladder[0] {
                    meta.epsilon_ladder = ladder.clone();
                }
            }
            meta.ladder_residual = worst;
            if worst > opts.ladder.tolerance {
                return Err(Error::Numerical {
                    message: format!(
                        "epsilon ladder did not converge: worst relative Richardson residual {worst:.3e}, ladder {:?}",
                        meta.epsilon_ladder
                    ),
                    residual: worst,
                });
            }
            results.into_iter().map(|(v, ..)| v * amplitude).collect()
        }
    };
    let function = RadialFunction::new(*space, grid.clone(), values)?;
    Ok(InverseResult { function, meta })
}

/// One radius of the ε-ladder: returns (value, residual, Λ_max, ladder).
fn ladder_point(
    space: &RankOneSpace,
    a: Complex64,
    r: f64,
    cfg: &LadderConfig,
    tail_tol: f64,
) -> Result<(Complex64, f64, f64, Vec<f64>)> {
    let mag = a.norm();
    let eps0 = cfg.scale * mag.min(4.0 * mag * mag / (r * r).max(1.0));
    let ladder: Vec<f64> = (0..cfg.rungs).map(|k| eps0 / 2f64.powi(k as i32)).collect();
    let mut rungs = Vec::with_capacity(ladder.len());
    let mut lmax_used = 0.0f64;
    for &eps in &ladder {
        let damped = a + eps;
        let lmax = gaussian_truncation(damped, tail_tol);
        lmax_used = lmax_used.max(lmax);
        rungs.push(gaussian_lambda_integral(space, damped, r, lmax)?);
    }
    let (value, residual) = quad::richardson(&rungs);
    Ok((value, residual, lmax_used, ladder))
}

/// `H⁻¹(e^{−a(λ²+ρ²)})(r)` by Euclidean reduction, for `Re a ≥ 0`, `a ≠ 0`.
///
/// The one-dimensional Fourier pair of the Gaussian is continued to complex
/// `a` by rotating the contour, `∫ e^{−aλ²} e^{iλs} dλ/2π = (4πa)^{−1/2} e^{−s²/4a}`
/// on the principal branch. On H³ the inverse Abel transform is the
/// derivative `−(2π sinh r)⁻¹ d/dr`, which gives a closed form; on H² it is
/// the integral `−(√2 π)⁻¹ ∫_r^∞ g'(s) (cosh s − cosh r)^{−1/2} ds`.
pub fn euclidean_reduction_gaussian(space: &RankOneSpace, a: Complex64, r: f64) -> Result<Complex64> {
    if a.norm() == 0.0 || a.re < -1e-15 * a.norm() {
        return domain(format!("need Re a >= 0 and a != 0, got {a}"));
    }
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    let rho2 = space.rho * space.rho;
    match (space.family, space.n) {
        (Family::Real, 3) => {
            let pref = (a * (4.0 * PI)).powf(-1.5) * (-a * rho2).exp();
            Ok(pref * phi0_h3(r) * (-(r * r) / (a * 4.0)).exp())
        }
        (Family::Real, 2) => Ok(h2_abel_gaussian(a, r)),
        _ => Err(Error::UnsupportedSpace(format!(
            "{space}: Euclidean reduction is implemented for H2(R) and H3(R)"
        ))),
    }
}

/// `√2 e^{−a/4} (4πa)^{−3/2} ∫_r^∞ s e^{−s²/4a} (cosh s − cosh r)^{−1/2} ds` with `s = r + u²`.
fn h2_abel_gaussian(a: Complex64, r: f64) -> Complex64 {
    let inv4a = 1.0 / (a * 4.0);
    // |integrand| ≲ s e^{−s/2 − Re(1/4a) s²}; the tail past r + 75 is below 1e−16 relative.
    let decay = inv4a.re;
    let span = if decay > 0.0 {
        (75.0f64).min((40.0 / decay).sqrt() + 10.0).max(10.0)
    } else {
        75.0
    };
    let umax = span.sqrt();
    // Phase (r+u²)²·Im(1/4a): frequency in u is ≈ 4(r+u²)u·|Im(1/4a)|.
    let freq_scale = inv4a.im.abs();
    let mut breaks = vec![0.0];
    let mut u: f64 = 0.0;
    while u < umax {
        let freq = |u: f64| 4.0 * (r + u * u) * u.max(0.1) * freq_scale + 2.0 * u + 1.0;
        let w0 = (6.0 / freq(u)).min(0.25);
        u = (u + (6.0 / freq(u + w0)).min(w0)).min(umax);
        breaks.push(u);
    }
    let sinh_r = r.sinh();
    let integral = integrate_breakpoints_complex(gl16(), &breaks, |u| {
        let u2 = u * u;
        let s = r + u2;
        let denom = (2.0 * (r + 0.5 * u2).sinh() * (0.5 * u2).sinh()).sqrt();
        if denom <= 0.0 {
            return if r > 0.0 {
                (-(r * r) * inv4a).exp() * (2.0 * r / sinh_r.sqrt())
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        (-(s * s) * inv4a).exp() * (2.0 * u * s / denom)
    });
    integral * SQRT_2 * (-a * 0.25).exp() * (a * (4.0 * PI)).powf(-1.5)
}

// ---------------------------------------------------------------------------
// Complex-group inverse
// ---------------------------------------------------------------------------

/// `(H⁻¹m)(exp H) = φ₀(exp H) · (F⁻¹m)(H)`, the inverse Euclidean Fourier
/// transform on `𝔭 ≅ R³` with the `(2π)^{−3}` normalization.
pub fn complex_inverse(space: &ComplexGroupSpace, m: &SpectralMultiplier, grid: &RadialGrid) -> Result<RadialFunction> {
    let h3 = space.as_rank_one()?;
    let rho2 = space.rho_norm().powi(2);
    let values: Vec<Complex64> = match m {
        SpectralMultiplier::Gaussian { amplitude, a } => {
            if a.norm() == 0.0 || a.re < -1e-15 * a.norm() {
                return domain(format!("Gaussian multiplier needs Re a >= 0 and a != 0, got a = {a}"));
            }
            let pref = amplitude * (-a * rho2).exp() * (a * (4.0 * PI)).powf(-1.5);
            grid.points()
                .iter()
                .map(|&r| pref * (-(r * r) / (a * 4.0)).exp() * space.phi0_at(&[r]).unwrap_or(1.0))
                .collect()
        }
        SpectralMultiplier::Samples(s) => grid
            .points()
            .par_iter()
            .map(|&r| {
                let p0 = space.phi0_at(&[r]).unwrap_or(1.0);
                let mut acc = ComplexSum::new();
                for ((&l, &w), &v) in s.grid.lambda.iter().zip(&s.grid.weights).zip(&s.values) {
                    acc.add(v * (w * radial_fourier_kernel(l, r)));
                }
                acc.value() * p0
            })
            .collect(),
        SpectralMultiplier::Function(f) => {
            let lmax = function_truncation(&h3, f.as_ref(), 1e-14);
            grid.points()
                .par_iter()
                .map(|&r| {
                    let p0 = space.phi0_at(&[r]).unwrap_or(1.0);
                    let breaks = breakpoints(lmax, |_| r + 1.0, 8.0);
                    let mut acc = ComplexSum::new();
                    for pair in breaks.windows(2) {
                        let est = quad::adaptive(|l| f(l) * radial_fourier_kernel(l, r), pair[0], pair[1], 1e-16, 1e-13, 2000)?;
                        acc.add(est.value);
                    }
                    Ok(acc.value() * p0)
                })
                .collect::<Result<_>>()?
        }
    };
    RadialFunction::new(h3, grid.clone(), values)
}

/// Radial kernel of the inverse Fourier transform on R³: `λ² sinc(λr) / 2π²`.
fn radial_fourier_kernel(l: f64, r: f64) -> f64 {
    let x = l * r;
    let sinc = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    l * l * sinc / (2.0 * PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::new(vec![0.1, 0.2, 0.3]).is_err());
        assert!(RadialGrid::new(vec![0.0, 0.2, 0.2, 0.3]).is_err());
        let g = RadialGrid::default_grid();
        assert_eq!(g.len(), 2048);
        assert_eq!(g.points()[0], 0.0);
        assert!((g.r_max() - 12.0).abs() < 1e-12);
        assert!(g.points()[1] < 12.0 / 2047.0);
    }

    #[test]
    fn simpson_weights_are_exact_for_quadratics() {
        for grid in [RadialGrid::geometric(3.0, 101, 2.0).unwrap(), RadialGrid::uniform(3.0, 100).unwrap()] {
            let s: f64 = grid
                .points()
                .iter()
                .zip(grid.weights())
                .map(|(&r, &w)| w * (r * r - 2.0 * r + 0.5))
                .sum();
            assert!((s - (9.0 - 9.0 + 1.5)).abs() < 1e-12, "{s}");
            let e: f64 = grid.points().iter().zip(grid.weights()).map(|(&r, &w)| w * r.exp()).sum();
            assert!((e - 3f64.exp_m1()).abs() < 1e-5, "{e}");
        }
    }

    #[test]
    fn phi_at_origin_and_symmetry() {
        for space in [RankOneSpace::h2(), RankOneSpace::h3()] {
            assert_eq!(phi_lambda_real(&space, 0.7, 0.0).unwrap(), Complex64::new(1.0, 0.0));
            for &r in &[0.3, 1.0, 4.0, 9.0] {
                let a = phi_lambda_real(&space, 1.3, r).unwrap();
                let b = phi_lambda_real(&space, -1.3, r).unwrap();
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn h3_closed_form_matches_integral_representation() {
        let h3 = RankOneSpace::h3();
        for &(l, r) in &[(0.0f64, 1.0f64), (0.7, 0.5), (2.5, 3.0), (5.0, 6.0)] {
            let exact = (if l == 0.0 { r } else { (l * r).sin() / l }) / r.sinh();
            let quad = phi_real_integral(&h3, Complex64::new(l, 0.0), r).unwrap();
            assert!((quad.re - exact).abs() < 1e-8, "λ={l} r={r}: {} vs {exact}", quad.re);
            assert!(quad.im.abs() < 1e-8);
        }
        assert!((phi0(&h3, 1.0).unwrap() - 0.850_918_128_239_321_5).abs() < 1e-12);
    }

    #[test]
    fn h2_mehler_matches_integral_representation() {
        let h2 = RankOneSpace::h2();
        for &(l, r) in &[(0.0, 0.5), (1.0, 1.0), (3.0, 2.0), (0.0, 5.0)] {
            let mehler = phi_h2_mehler(Complex64::new(l, 0.0), r);
            let k_int = phi_real_integral(&h2, Complex64::new(l, 0.0), r).unwrap();
            assert!((mehler - k_int).norm() < 1e-9, "λ={l} r={r}: {mehler} vs {k_int}");
        }
    }

    #[test]
    fn h2_domination_by_phi0() {
        let h2 = RankOneSpace::h2();
        for &r in &[0.5, 1.0, 3.0, 8.0] {
            let p0 = phi0(&h2, r).unwrap();
            assert!(p0 > 0.0 && p0 <= 1.0);
            for &l in &[0.3, 1.0, 2.0, 7.0] {
                assert!(phi_lambda_real(&h2, l, r).unwrap().norm() <= p0 + 1e-12);
            }
        }
    }

    #[test]
    fn imaginary_parameter_endpoints() {
        // φ_{iρ} ≡ 1, φ_{i·0} = φ₀.
        for space in [RankOneSpace::h2(), RankOneSpace::h3()] {
            for &r in &[0.5, 2.0, 6.0] {
                assert!((phi_imaginary(&space, space.rho, r).unwrap() - 1.0).abs() < 1e-10);
                assert!((phi_imaginary(&space, 0.0, r).unwrap() - phi0(&space, r).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ode_route_agrees_with_closed_form() {
        let h3 = RankOneSpace::h3();
        for &(l, r) in &[(0.0, 2.0), (1.5, 1.0)] {
            let ode = phi_ode(&h3, Complex64::new(l, 0.0), r);
            let exact = phi_h3(Complex64::new(l, 0.0), r);
            assert!((ode - exact).norm() < 1e-7, "{ode} vs {exact}");
        }
        let c4 = crate::lie_data::make_rank_one_space(Family::Complex, 4).unwrap();
        let p = phi0(&c4, 3.0).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn plancherel_values() {
        let h3 = RankOneSpace::h3();
        let h2 = RankOneSpace::h2();
        assert_eq!(plancherel_density(&h3, 0.0).unwrap(), 0.0);
        assert!((plancherel_density(&h3, 2.0).unwrap() - 4.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!((plancherel_density(&h2, 1.0).unwrap() - 0.996_272_076_220_75 / (2.0 * PI)).abs() < 1e-13);
        let c4 = crate::lie_data::make_rank_one_space(Family::Complex, 4).unwrap();
        assert!(matches!(plancherel_density(&c4, 1.0), Err(Error::UnsupportedSpace(_))));
    }

    #[test]
    fn oscillatory_multiplier_refused_without_flag() {
        let grid = RadialGrid::uniform(2.0, 5).unwrap();
        let err = inverse_transform(
            &RankOneSpace::h3(),
            &SpectralMultiplier::schrodinger(1.0),
            &grid,
            &InverseOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Refused(_)));
    }

    #[test]
    fn forward_of_zero_is_zero() {
        let h3 = RankOneSpace::h3();
        let f = RadialFunction::zeros(h3, RadialGrid::uniform(5.0, 101).unwrap());
        let s = forward_transform(&f, &SpectralGrid::new(5.0, 2).unwrap()).unwrap();
        assert!(s.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn forward_rejects_non_decaying_input() {
        let h3 = RankOneSpace::h3();
        let f = RadialFunction::from_real_fn(h3, RadialGrid::uniform(8.0, 201).unwrap(), |_| 1.0).unwrap();
        let err = forward_transform(&f, &SpectralGrid::new(2.0, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn h2_reduction_matches_heat_quadrature() {
        // Real time: the Abel route and the Mehler–Fock λ-integral must agree.
        let h2 = RankOneSpace::h2();
        for &r in &[0.0, 0.5, 2.0, 5.0] {
            let abel = euclidean_reduction_gaussian(&h2, Complex64::new(0.7, 0.0), r).unwrap();
            let lam = gaussian_lambda_integral(&h2, Complex64::new(0.7, 0.0), r, gaussian_truncation(Complex64::new(0.7, 0.0), 1e-15)).unwrap();
            assert!((abel - lam).norm() < 1e-9 * lam.norm().max(1e-3), "r={r}: {abel} vs {lam}");
        }
    }

    #[test]
    fn interpolation_reproduces_cubic() {
        let x: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
        let y: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t * t * t, -t)).collect();
        let v = interpolate(&x, &y, 0.537);
        assert!((v - Complex64::new(0.537f64.powi(3), -0.537)).norm() < 1e-12);
    }
}
