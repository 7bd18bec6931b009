//! `SL(2, C)` matrices, their action on H² and H³, and model distances.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Upper half-plane H² or upper half-space H³.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "upper_half_plane_H2")]
    UpperHalfPlane,
    #[serde(rename = "upper_half_space_H3")]
    UpperHalfSpace,
}

impl Model {
    pub fn dimension(self) -> u32 {
        match self {
            Self::UpperHalfPlane => 2,
            Self::UpperHalfSpace => 3,
        }
    }

    /// Standard basepoint `i` resp. `(0, 1)`.
    pub fn origin(self) -> Point {
        match self {
            Self::UpperHalfPlane => Point::plane(Complex64::new(0.0, 1.0)),
            Self::UpperHalfSpace => Point::space(Complex64::new(0.0, 0.0), 1.0),
        }
    }
}

/// A point of H² (`h` unused, `z` in the upper half-plane) or of H³
/// (`z ∈ C`, height `h > 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: Complex64,
    pub h: f64,
    pub model: Model,
}

impl Point {
    pub fn plane(z: Complex64) -> Self {
        Self {
            z,
            h: z.im,
            model: Model::UpperHalfPlane,
        }
    }

    pub fn space(z: Complex64, h: f64) -> Self {
        Self {
            z,
            h,
            model: Model::UpperHalfSpace,
        }
    }

    /// Height above the boundary.
    pub fn height(&self) -> f64 {
        match self.model {
            Model::UpperHalfPlane => self.z.im,
            Model::UpperHalfSpace => self.h,
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.height() > 0.0 && self.height().is_finite() && self.z.re.is_finite() && self.z.im.is_finite();
        if ok {
            Ok(())
        } else {
            domain(format!("point {self:?} is not in the open model domain"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.entries().iter().all(|z| z.im == 0.0)
    }

    /// `min(‖A − B‖, ‖A + B‖)`: distance in `PSL(2, C)`.
    pub fn projective_distance(&self, other: &Self) -> f64 {
        let minus = Self::new(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d).frobenius();
        let plus = Self::new(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d).frobenius();
        minus.min(plus)
    }

    /// Translation length `2 Re acosh(tr/2)` (0 for elliptic or parabolic elements).
    pub fn translation_length(&self) -> f64 {
        let half = self.trace() * 0.5;
        let z = (half + (half * half - 1.0).sqrt()).ln();
        (2.0 * z.re).abs()
    }

    pub fn act(&self, p: &Point) -> Point {
        match p.model {
            Model::UpperHalfPlane => {
                // Im(γz) = Im z / |cz + d|² avoids cancellation for long words.
                let den = self.c * p.z + self.d;
                let w = (self.a * p.z + self.b) / den;
                Point::plane(Complex64::new(w.re, p.z.im / den.norm_sqr()))
            }
            Model::UpperHalfSpace => {
                let num = self.a * p.z + self.b;
                let den = self.c * p.z + self.d;
                let h2 = p.h * p.h;
                let dd = den.norm_sqr() + self.c.norm_sqr() * h2;
                let z = (num * den.conj() + self.a * self.c.conj() * h2) / dd;
                Point::space(z, p.h / dd)
            }
        }
    }

    /// Boundary Möbius action (`None` at the pole).
    pub fn act_boundary(&self, z: Complex64) -> Option<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            None
        } else {
            Some((self.a * z + self.b) / den)
        }
    }

    /// Isometric circle `|cz + d| = 1`: centre `−d/c`, radius `1/|c|`.
    pub fn isometric_circle(&self) -> Option<(Complex64, f64)> {
        if self.c.norm() < 1e-14 {
            None
        } else {
            Some((-self.d / self.c, 1.0 / self.c.norm()))
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Hyperbolic distance in the upper half-plane / half-space model, in the
/// stable form `d = 2 asinh(|x − y|_E / (2 √(h h')))`.
pub fn hyperbolic_distance(x: &Point, y: &Point) -> Result<f64> {
    if x.model != y.model {
        return domain("points belong to different models");
    }
    x.check()?;
    y.check()?;
    let (hx, hy) = (x.height(), y.height());
    let chord2 = match x.model {
        Model::UpperHalfPlane => (x.z - y.z).norm_sqr(),
        Model::UpperHalfSpace => (x.z - y.z).norm_sqr() + (x.h - y.h).powi(2),
    };
    Ok(2.0 * (chord2.sqrt() / (2.0 * (hx * hy).sqrt())).asinh())
}

pub(crate) fn distance_unchecked(x: &Point, y: &Point) -> f64 {
    let chord2 = match x.model {
        Model::UpperHalfPlane => (x.z - y.z).norm_sqr(),
        Model::UpperHalfSpace => (x.z - y.z).norm_sqr() + (x.h - y.h).powi(2),
    };
    2.0 * (chord2.sqrt() / (2.0 * (x.height() * y.height()).sqrt())).asinh()
}

/// Distance from `x` to the closed region bounded by the geodesic
/// semicircle / hemisphere over the boundary disc `|z − m| ≤ radius`
/// (0 when `x` lies inside).
pub fn distance_to_half_ball(x: &Point, m: Complex64, radius: f64) -> f64 {
    let h = x.height();
    let along = match x.model {
        Model::UpperHalfPlane => (x.z.re - m.re).powi(2) + (x.z.im).powi(2),
        Model::UpperHalfSpace => (x.z - m).norm_sqr() + h * h,
    };
    let gap = along - radius * radius;
    if gap <= 0.0 {
        0.0
    } else {
        (gap / (2.0 * radius * h)).asinh()
    }
}

/// Circle through three boundary points (`None` if collinear), computed
/// relative to `p` so nearby points keep their precision.
pub(crate) fn circumcircle(p: Complex64, q: Complex64, r: Complex64) -> Option<(Complex64, f64)> {
    let b = q - p;
    let c = r - p;
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let (b2, c2) = (b.norm_sqr(), c.norm_sqr());
    let u = Complex64::new((c.im * b2 - b.im * c2) / d, (b.re * c2 - c.re * b2) / d);
    Some((p + u, u.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_distance_is_log_ratio() {
        let i = Point::plane(Complex64::new(0.0, 1.0));
        let ei = Point::plane(Complex64::new(0.0, std::f64::consts::E));
        assert!((hyperbolic_distance(&i, &ei).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(hyperbolic_distance(&i, &i).unwrap(), 0.0);
        assert!(hyperbolic_distance(&i, &Point::plane(Complex64::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn action_preserves_distance_in_both_models() {
        let m = Mat2::new(
            Complex64::new(1.2, 0.3),
            Complex64::new(0.5, -0.1),
            Complex64::new(0.2, 0.4),
            Complex64::new(0.0, 0.0),
        );
        let s = m.det().sqrt();
        let m = Mat2::new(m.a / s, m.b / s, m.c / s, m.d / s);
        let x = Point::space(Complex64::new(0.3, -0.2), 0.7);
        let y = Point::space(Complex64::new(-1.0, 0.5), 2.1);
        let d0 = hyperbolic_distance(&x, &y).unwrap();
        let d1 = hyperbolic_distance(&m.act(&x), &m.act(&y)).unwrap();
        assert!((d0 - d1).abs() < 1e-12);

        let r = Mat2::real(2.0, 1.0, 1.0, 1.0);
        let p = Point::plane(Complex64::new(0.4, 0.9));
        let q = Point::plane(Complex64::new(-2.0, 0.1));
        let e0 = hyperbolic_distance(&p, &q).unwrap();
        let e1 = hyperbolic_distance(&r.act(&p), &r.act(&q)).unwrap();
        assert!((e0 - e1).abs() < 1e-12);
        // The real matrix acts on H³ extending its action on H².
        let lifted = r.act(&Point::space(Complex64::new(0.4, 0.0), 0.9));
        assert!((lifted.z - Complex64::new(r.act(&p).z.re, 0.0)).norm() < 1e-14);
        assert!((lifted.h - r.act(&p).z.im).abs() < 1e-14);
    }

    #[test]
    fn translation_length_of_diagonal() {
        let l = 1.3f64;
        let m = Mat2::real((l / 2.0).exp(), 0.0, 0.0, (-l / 2.0).exp());
        assert!((m.translation_length() - l).abs() < 1e-12);
        assert!(Mat2::identity().translation_length() < 1e-7);
    }

    #[test]
    fn half_ball_distance_matches_geodesic_distance() {
        // Region over [-1, 1]; nearest point to 2i is i.
        let x = Point::plane(Complex64::new(0.0, 2.0));
        let d = distance_to_half_ball(&x, Complex64::new(0.0, 0.0), 1.0);
        assert!((d - 2f64.ln()).abs() < 1e-14);
        assert_eq!(distance_to_half_ball(&Point::plane(Complex64::new(0.0, 0.5)), Complex64::new(0.0, 0.0), 1.0), 0.0);
    }

    #[test]
    fn circumcircle_of_unit_circle_points() {
        let (c, r) = circumcircle(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)).unwrap();
        assert!(c.norm() < 1e-14 && (r - 1.0).abs() < 1e-14);
        let z0 = Complex64::new(1.1, 0.3);
        let eps = 1e-9;
        let (c, r) = circumcircle(z0 + eps, z0 + Complex64::new(0.0, eps), z0 - eps).unwrap();
        assert!((c - z0).norm() < 1e-15 && (r / eps - 1.0).abs() < 1e-6);
    }
}
