//! Sine-series discretization of radial functions on `H³`.
//!
//! A radial `u` is stored through `v(r) = sinh(r) u(r)`, which turns the
//! shifted Laplacian `−Δ − 1` into `−∂²_r` with a Dirichlet condition at the
//! origin. On `[0, R]` with a Dirichlet wall at `R` the sine modes
//! `sin(λ_k r)`, `λ_k = kπ/R`, are exact eigenfunctions with eigenvalue
//! `λ_k² + 1` of `−Δ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Result};
use crate::lie_data::RankOneSpace;
use crate::spherical::{RadialFunction, RadialGrid};

/// Interior nodes `r_j = j R/(N+1)`, `j = 1..N`, with an orthonormal DST-I.
#[derive(Clone)]
pub struct SineBasis {
    r_max: f64,
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    sinh: Vec<f64>,
    grid: RadialGrid,
}

impl std::fmt::Debug for SineBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineBasis").field("r_max", &self.r_max).field("n", &self.n).finish()
    }
}

impl SineBasis {
    /// `n` interior points on `(0, r_max)`; `n + 1` must be even so the
    /// full grid carries composite Simpson weights.
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return domain(format!("sine basis needs a finite positive radius, got {r_max}"));
        }
        if n < 3 || n % 2 == 0 {
            return domain(format!("sine basis needs an odd number of interior points >= 3, got {n}"));
        }
        if r_max > 700.0 {
            return domain("sine basis radius must stay below 700 (sinh overflow)");
        }
        let h = r_max / (n + 1) as f64;
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        let sinh = (1..=n).map(|j| (j as f64 * h).sinh()).collect();
        let grid = RadialGrid::uniform(r_max, n + 2)?;
        Ok(Self {
            r_max,
            n,
            fft,
            sinh,
            grid,
        })
    }

    /// `R = 300`, `N = 8191`.
    pub fn default_h3() -> Self {
        Self::new(300.0, 8191).expect("default sine basis is valid")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / (self.n + 1) as f64
    }

    /// Full grid `0, h, …, R` used for [`RadialFunction`] values.
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// `λ_k = kπ/R` for the coefficient with index `k − 1`.
    pub fn lambda(&self, index: usize) -> f64 {
        (index + 1) as f64 * PI / self.r_max
    }

    pub(crate) fn sinh_nodes(&self) -> &[f64] {
        &self.sinh
    }

    /// Orthonormal DST-I; it is its own inverse.
    pub fn transform(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n, "sine transform length mismatch");
        let m = 2 * (self.n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1] = v;
            buf[m - j - 1] = -v;
        }
        self.fft.process(&mut buf);
        // Z_k = −2i S_k for the odd extension.
        let scale = (2.0 / (self.n + 1) as f64).sqrt() * 0.5;
        buf[1..=self.n].iter().map(|z| Complex64::new(-z.im, z.re) * scale).collect()
    }

    /// Sine coefficients of `u` sampled on [`Self::grid`].
    pub fn coefficients(&self, u: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.n + 2, "radial values length mismatch");
        let v: Vec<Complex64> = u[1..=self.n].iter().zip(&self.sinh).map(|(u, s)| u * *s).collect();
        self.transform(&v)
    }

    /// Values of `u = v / sinh r` on [`Self::grid`]; the origin value is the
    /// spectral derivative `v′(0)`.
    pub fn values(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let v = self.transform(coeffs);
        self.values_from_v(coeffs, &v)
    }

    pub(crate) fn values_from_v(&self, coeffs: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
        let norm = (2.0 / (self.n + 1) as f64).sqrt();
        let mut origin = Complex64::new(0.0, 0.0);
        for (k, c) in coeffs.iter().enumerate() {
            origin += c * self.lambda(k);
        }
        let mut out = Vec::with_capacity(self.n + 2);
        out.push(origin * norm);
        out.extend(v.iter().zip(&self.sinh).map(|(v, s)| v / *s));
        out.push(Complex64::new(0.0, 0.0));
        out
    }

    /// Values of `f` on [`Self::grid`], by cubic interpolation when `f` lives
    /// on another grid.
    pub fn sample(&self, f: &RadialFunction) -> Result<Vec<Complex64>> {
        if !f.space.is_real_hyperbolic(3) {
            return Err(crate::Error::UnsupportedSpace(format!(
                "the sine propagator is implemented on H3 only, got {}",
                f.space.label()
            )));
        }
        if f.singular_at_origin {
            return domain("initial data must be regular at the origin");
        }
        if f.grid.points() == self.grid.points() {
            return Ok(f.values.clone());
        }
        Ok(self.grid.points().iter().map(|&r| f.eval(r)).collect())
    }

    pub fn radial(&self, values: Vec<Complex64>) -> Result<RadialFunction> {
        RadialFunction::new(RankOneSpace::h3(), self.grid.clone(), values)
    }

    /// `‖u‖_{L²(H³)}` from sine coefficients (Parseval).
    pub fn l2_norm_coeffs(&self, coeffs: &[Complex64]) -> f64 {
        let s: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        (4.0 * PI * self.spacing() * s).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_is_an_involution() {
        let b = SineBasis::new(10.0, 63).unwrap();
        let x: Vec<Complex64> = (0..63).map(|j| Complex64::new((j as f64 * 0.3).sin(), j as f64 * 0.01)).collect();
        let y = b.transform(&b.transform(&x));
        for (a, c) in x.iter().zip(&y) {
            assert!((a - c).norm() < 1e-13);
        }
    }

    #[test]
    fn transform_matches_direct_sum() {
        let n = 15;
        let b = SineBasis::new(1.0, n).unwrap();
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new(1.0 / (j + 1) as f64, (j as f64).cos())).collect();
        let y = b.transform(&x);
        for (k, yk) in y.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                s += xj * (PI * ((j + 1) * (k + 1)) as f64 / (n + 1) as f64).sin();
            }
            s *= (2.0 / (n + 1) as f64).sqrt();
            assert!((s - yk).norm() < 1e-13);
        }
    }

    #[test]
    fn parseval_matches_grid_norm() {
        let b = SineBasis::new(40.0, 2047).unwrap();
        let f = RadialFunction::from_real_fn(RankOneSpace::h3(), b.grid().clone(), |r| (-r * r).exp()).unwrap();
        let c = b.coefficients(&f.values);
        let rel = (b.l2_norm_coeffs(&c) / f.l2_norm() - 1.0).abs();
        assert!(rel < 1e-12, "{rel}");
        let back = b.values(&c);
        assert!((back[0].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_even_sizes() {
        assert!(SineBasis::new(10.0, 64).is_err());
    }
}
