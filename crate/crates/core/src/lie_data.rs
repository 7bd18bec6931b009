//! Root data of rank-one symmetric spaces and of spaces `G/K` with `G`
//! complex, together with the exponents derived from them.
//!
//! All quantities use the geodesic normalization: the simple root satisfies
//! `α(H₀) = 1` with `|H₀| = 1`, so the radial coordinate `r = |H|` is the
//! Riemannian distance to the origin.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Classical families of non-compact rank-one symmetric spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
    #[serde(rename = "H")]
    Quaternionic,
    #[serde(rename = "O")]
    Octonionic,
}

impl Family {
    pub fn symbol(self) -> &'static str {
        match self {
            Family::Real => "R",
            Family::Complex => "C",
            Family::Quaternionic => "H",
            Family::Octonionic => "O",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" | "real" => Ok(Family::Real),
            "C" | "c" | "complex" => Ok(Family::Complex),
            "H" | "h" | "quaternionic" => Ok(Family::Quaternionic),
            "O" | "o" | "octonionic" => Ok(Family::Octonionic),
            other => Err(Error::Parse(format!("unknown family `{other}` (expected R, C, H or O)"))),
        }
    }
}

/// A non-compact rank-one symmetric space `X = G/K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneSpace {
    pub family: Family,
    /// Real dimension of `X`.
    pub n: u32,
    pub m_alpha: u32,
    pub m_2alpha: u32,
    pub rho: f64,
    pub rho_m: f64,
}

impl RankOneSpace {
    /// Real hyperbolic plane.
    pub fn h2() -> Self {
        make_rank_one_space(Family::Real, 2).expect("H^2 is a catalog space")
    }

    /// Real hyperbolic 3-space.
    pub fn h3() -> Self {
        make_rank_one_space(Family::Real, 3).expect("H^3 is a catalog space")
    }

    pub fn is_real_hyperbolic(&self, n: u32) -> bool {
        self.family == Family::Real && self.n == n
    }

    /// Short label such as `H3(R)`.
    pub fn label(&self) -> String {
        match self.family {
            Family::Real => format!("H{}(R)", self.n),
            Family::Complex => format!("H{}(C)", self.n / 2),
            Family::Quaternionic => format!("H{}(H)", self.n / 4),
            Family::Octonionic => "H2(O)".to_string(),
        }
    }

    /// `δ(r) = sinh^{m_α}(r) · sinh^{m_2α}(2r)`.
    pub fn density(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return domain(format!("radius must be nonnegative, got {r}"));
        }
        Ok(self.density_unchecked(r))
    }

    pub(crate) fn density_unchecked(&self, r: f64) -> f64 {
        r.sinh().powi(self.m_alpha as i32) * (2.0 * r).sinh().powi(self.m_2alpha as i32)
    }

    /// Constant `ω` with `dvol = ω · δ(r) dr · dσ/|S^{n-1}|` in geodesic polar
    /// coordinates, so that `ω δ(r) ~ |S^{n-1}| r^{n-1}` near the origin.
    pub fn volume_constant(&self) -> f64 {
        sphere_area(self.n) / 2f64.powi(self.m_2alpha as i32)
    }

    /// Riemannian volume density in the radial variable: `ω · δ(r)`.
    pub fn volume_density(&self, r: f64) -> f64 {
        self.volume_constant() * self.density_unchecked(r)
    }

    /// `ρ_p = |2/p − 1| ρ`. `p = ∞` is allowed.
    pub fn rho_p(&self, p: f64) -> Result<f64> {
        rho_p(self, p)
    }
}

impl fmt::Display for RankOneSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Area of the unit sphere `S^{n-1} ⊂ R^n`.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half_integer(n: u32) -> f64 {
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        let k = (n - 1) / 2;
        let mut g = PI.sqrt();
        for j in 0..k {
            g *= j as f64 + 0.5;
        }
        g
    }
}

/// Build a rank-one space from its family and its *real* dimension.
pub fn make_rank_one_space(family: Family, n: u32) -> Result<RankOneSpace> {
    let (m_alpha, m_2alpha) = match family {
        Family::Real => {
            if n < 2 {
                return domain(format!("real hyperbolic space needs n >= 2, got {n}"));
            }
            (n - 1, 0)
        }
        Family::Complex => {
            if n < 4 || n % 2 != 0 {
                return domain(format!(
                    "complex hyperbolic space needs even real dimension n >= 4, got {n}"
                ));
            }
            (n - 2, 1)
        }
        Family::Quaternionic => {
            if n < 8 || n % 4 != 0 {
                return domain(format!(
                    "quaternionic hyperbolic space needs real dimension divisible by 4 and n >= 8, got {n}"
                ));
            }
            (n - 4, 3)
        }
        Family::Octonionic => {
            if n != 16 {
                return domain(format!("the octonionic hyperbolic plane has real dimension 16, got {n}"));
            }
            (8, 7)
        }
    };
    let rho = m_alpha as f64 / 2.0 + m_2alpha as f64;
    Ok(RankOneSpace {
        family,
        n,
        m_alpha,
        m_2alpha,
        rho,
        rho_m: rho,
    })
}

/// Default catalog dumped by the `lie` subcommand.
pub fn catalog() -> Vec<RankOneSpace> {
    let entries = [
        (Family::Real, 2),
        (Family::Real, 3),
        (Family::Real, 4),
        (Family::Real, 5),
        (Family::Complex, 4),
        (Family::Complex, 6),
        (Family::Quaternionic, 8),
        (Family::Quaternionic, 12),
        (Family::Octonionic, 16),
    ];
    entries
        .iter()
        .map(|&(f, n)| make_rank_one_space(f, n).expect("catalog entries are legal"))
        .collect()
}

/// Cartan density `δ(r)` of a rank-one space; errors on negative `r`.
pub fn density_delta(space: &RankOneSpace, r: f64) -> Result<f64> {
    space.density(r)
}

pub fn rho_p(space: &RankOneSpace, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return domain(format!("rho_p needs p >= 1, got {p}"));
    }
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok((2.0 * inv - 1.0).abs() * space.rho)
}

/// `s(p) = 2 min(1/p, 1/p')` for `1 < p < ∞`.
pub fn s_exponent(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return domain(format!("s(p) needs 1 < p < inf, got {p}"));
    }
    let inv = 1.0 / p;
    Ok(2.0 * inv.min(1.0 - inv))
}

/// Weyl group data. Only rank one is supported: `W = {±1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeylData {
    pub group_order: usize,
}

impl WeylData {
    pub fn rank_one() -> Self {
        Self { group_order: 2 }
    }

    /// Description of the closed positive chamber.
    pub fn chamber(&self) -> &'static str {
        "a+ = { s H0 : s >= 0 }"
    }

    /// Average of `f` over the Weyl group acting on `λ`.
    pub fn symmetrize<T>(&self, f: impl Fn(f64) -> T, lambda: f64) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        (f(lambda) + f(-lambda)) * 0.5
    }
}

/// Symmetric space `G/K` with `G` complex semisimple.
///
/// Roots are linear forms on `𝔞`, written in an orthonormal basis of `𝔞`;
/// every root multiplicity is 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexGroupSpace {
    pub label: String,
    pub positive_roots: Vec<Vec<f64>>,
    pub rank: usize,
    pub n: u32,
    pub rho: Vec<f64>,
    pub rho_m: f64,
}

impl ComplexGroupSpace {
    /// `SL(2, C)/SU(2)`, isometric to real hyperbolic 3-space.
    pub fn sl2c() -> Self {
        Self::from_positive_roots("SL(2,C)", vec![vec![1.0]]).expect("SL(2,C) root data is valid")
    }

    pub fn from_positive_roots(label: &str, positive_roots: Vec<Vec<f64>>) -> Result<Self> {
        let rank = positive_roots
            .first()
            .map(|r| r.len())
            .ok_or_else(|| Error::Domain("at least one positive root is required".into()))?;
        if rank == 0 || positive_roots.iter().any(|r| r.len() != rank) {
            return domain("all roots must be forms on the same nonzero-dimensional space");
        }
        // Multiplicity 2 for every root: ρ = Σ_{α>0} α.
        let mut rho = vec![0.0; rank];
        for root in &positive_roots {
            for (acc, &c) in rho.iter_mut().zip(root) {
                *acc += c;
            }
        }
        let n = (rank + 2 * positive_roots.len()) as u32;
        let (rho_m, _) = chamber_minimum(&positive_roots, &rho)?;
        Ok(Self {
            label: label.to_string(),
            positive_roots,
            rank,
            n,
            rho,
            rho_m,
        })
    }

    pub fn rho_norm(&self) -> f64 {
        self.rho.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Unit vector of the closed chamber on which `ρ(H)` attains `ρ_m`.
    pub fn rho_m_direction(&self) -> Vec<f64> {
        chamber_minimum(&self.positive_roots, &self.rho)
            .map(|(_, d)| d)
            .expect("root data validated at construction")
    }

    /// Number of positive roots `|Σ⁺|`.
    pub fn positive_root_count(&self) -> usize {
        self.positive_roots.len()
    }

    /// `φ₀(exp H) = Π_{α>0} α(H) / sinh α(H)`.
    pub fn phi0_at(&self, h: &[f64]) -> Result<f64> {
        if h.len() != self.rank {
            return domain(format!("expected a vector of length {}, got {}", self.rank, h.len()));
        }
        let mut prod = 1.0;
        for root in &self.positive_roots {
            let a: f64 = root.iter().zip(h).map(|(x, y)| x * y).sum();
            if a < -1e-12 {
                return domain("point lies outside the closed positive chamber");
            }
            if a.abs() > 1e-300 {
                prod *= a / a.sinh();
            }
        }
        Ok(prod)
    }

    /// Rank-one spaces only: the equivalent real hyperbolic space (`SL(2,C)` gives H³).
    pub fn as_rank_one(&self) -> Result<RankOneSpace> {
        if self.rank == 1 && self.positive_roots.len() == 1 && (self.positive_roots[0][0].abs() - 1.0).abs() < 1e-12 {
            Ok(RankOneSpace::h3())
        } else {
            Err(Error::UnsupportedSpace(format!(
                "{}: only the rank-one instance SL(2,C) is exercised numerically",
                self.label
            )))
        }
    }
}

/// `min ρ(H)` over unit vectors of the closed positive chamber.
///
/// The function `ρ(H)/|H|` is quasi-concave on the chamber, so the minimum is
/// attained on an extreme ray; those are enumerated as kernels of
/// `rank − 1` independent roots.
fn chamber_minimum(roots: &[Vec<f64>], rho: &[f64]) -> Result<(f64, Vec<f64>)> {
    let rank = rho.len();
    if rank == 1 {
        let sign = roots[0][0].signum();
        return Ok(((rho[0] * sign).abs(), vec![sign]));
    }
    let in_chamber = |h: &[f64]| {
        roots
            .iter()
            .all(|r| r.iter().zip(h).map(|(x, y)| x * y).sum::<f64>() >= -1e-10)
    };
    let mut best = f64::INFINITY;
    let mut best_dir = Vec::new();
    let mut idx: Vec<usize> = (0..rank - 1).collect();
    loop {
        let rows: Vec<&[f64]> = idx.iter().map(|&i| roots[i].as_slice()).collect();
        if let Some(dir) = null_direction(&rows, rank) {
            for sign in [1.0, -1.0] {
                let h: Vec<f64> = dir.iter().map(|x| x * sign).collect();
                if in_chamber(&h) {
                    let val: f64 = rho.iter().zip(&h).map(|(a, b)| a * b).sum();
                    if val < best {
                        best = val;
                        best_dir = h;
                    }
                }
            }
        }
        // Next combination.
        let k = rank - 1;
        let mut i = k;
        loop {
            if i == 0 {
                return if best.is_finite() {
                    Ok((best, best_dir))
                } else {
                    domain("positive roots do not span a pointed chamber")
                };
            }
            i -= 1;
            if idx[i] != i + roots.len() - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Unit vector spanning the kernel of `rows` (expected 1-dimensional).
fn null_direction(rows: &[&[f64]], dim: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..dim {
        if row >= m.len() {
            break;
        }
        let (best, val) = (row..m.len())
            .map(|i| (i, m[i][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if val < 1e-12 {
            continue;
        }
        m.swap(row, best);
        let p = m[row][col];
        for x in m[row].iter_mut() {
            *x /= p;
        }
        for i in 0..m.len() {
            if i != row {
                let factor = m[i][col];
                if factor != 0.0 {
                    for j in 0..dim {
                        m[i][j] -= factor * m[row][j];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() != dim - 1 {
        return None;
    }
    let free = (0..dim).find(|c| !pivots.contains(c))?;
    let mut v = vec![0.0; dim];
    v[free] = 1.0;
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[r][free];
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Some(v.into_iter().map(|x| x / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_multiplicities() {
        let h3 = make_rank_one_space(Family::Real, 3).unwrap();
        assert_eq!((h3.m_alpha, h3.m_2alpha), (2, 0));
        assert_eq!(h3.rho, 1.0);
        let h2 = make_rank_one_space(Family::Real, 2).unwrap();
        assert_eq!((h2.m_alpha, h2.m_2alpha), (1, 0));
        assert_eq!(h2.rho, 0.5);
        let o = make_rank_one_space(Family::Octonionic, 16).unwrap();
        assert_eq!((o.m_alpha, o.m_2alpha), (8, 7));
        assert_eq!(o.rho, 11.0);
        for s in catalog() {
            assert_eq!(s.n, 1 + s.m_alpha + s.m_2alpha);
            assert_eq!(s.rho, s.m_alpha as f64 / 2.0 + s.m_2alpha as f64);
            assert_eq!(s.rho_m, s.rho);
            assert!(s.m_alpha >= 1);
        }
    }

    #[test]
    fn illegal_pairs_name_the_constraint() {
        let err = make_rank_one_space(Family::Complex, 5).unwrap_err();
        assert!(err.to_string().contains("even"), "{err}");
        assert!(make_rank_one_space(Family::Real, 1).is_err());
        assert!(make_rank_one_space(Family::Quaternionic, 4).is_err());
        assert!(make_rank_one_space(Family::Octonionic, 8).is_err());
    }

    #[test]
    fn density_values() {
        let h2 = RankOneSpace::h2();
        let h3 = RankOneSpace::h3();
        assert_eq!(h2.density(0.0).unwrap(), 0.0);
        assert!((h2.density(1.0).unwrap() - 1.175_201_193_643_801_4).abs() < 1e-12);
        assert!((h3.density(2.0).unwrap() - 13.154_116_418_008_245).abs() < 1e-9);
        assert!(h3.density(-0.1).is_err());
    }

    #[test]
    fn density_is_dominated_by_exponential() {
        for s in catalog() {
            // Past r ≈ 30 the octonionic density overflows f64.
            for k in 0..200 {
                let r = 1.0 + 0.1 * k as f64;
                let v = s.density(r).unwrap() * (-2.0 * s.rho * r).exp();
                assert!(v <= 1.0, "{s}: {v} at r = {r}");
            }
        }
    }

    #[test]
    fn rho_p_and_s_exponent() {
        let h3 = RankOneSpace::h3();
        assert_eq!(rho_p(&h3, 2.0).unwrap(), 0.0);
        assert_eq!(rho_p(&h3, 1.0).unwrap(), 1.0);
        assert_eq!(rho_p(&h3, 4.0).unwrap(), 0.5);
        assert_eq!(rho_p(&h3, f64::INFINITY).unwrap(), 1.0);
        assert!(rho_p(&h3, 0.5).is_err());
        assert_eq!(s_exponent(2.0).unwrap(), 1.0);
        assert_eq!(s_exponent(4.0).unwrap(), 0.5);
        assert!((s_exponent(4.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(s_exponent(1.0).is_err());
        assert!(s_exponent(f64::INFINITY).is_err());
    }

    #[test]
    fn rho_p_vanishes_only_at_two() {
        let h2 = RankOneSpace::h2();
        for k in 1..=400 {
            let inv_p = k as f64 / 400.0;
            let v = rho_p(&h2, 1.0 / inv_p).unwrap();
            if (inv_p - 0.5).abs() > 1e-12 {
                assert!(v > 0.0);
            } else {
                assert!(v.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn complex_group_data() {
        let sl2 = ComplexGroupSpace::sl2c();
        assert_eq!(sl2.n, 3);
        assert_eq!(sl2.rho, vec![1.0]);
        assert_eq!(sl2.rho_m, 1.0);
        assert!((sl2.phi0_at(&[1.0]).unwrap() - 1.0 / 1f64.sinh()).abs() < 1e-15);

        let product = ComplexGroupSpace::from_positive_roots("SL2xSL2", vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(product.n, 6);
        assert!((product.rho_m - 1.0).abs() < 1e-12);
        assert!(product.rho_m <= product.rho_norm());

        let s3 = 3f64.sqrt();
        let a2 = ComplexGroupSpace::from_positive_roots(
            "A2",
            vec![vec![1.0, 0.0], vec![-0.5, s3 / 2.0], vec![0.5, s3 / 2.0]],
        )
        .unwrap();
        assert_eq!(a2.n, 8);
        assert!((a2.rho_norm() - 2.0).abs() < 1e-12);
        assert!((a2.rho_m - s3).abs() < 1e-12);
    }

    #[test]
    fn weyl_symmetrization_is_even() {
        let w = WeylData::rank_one();
        let f = |l: f64| l.powi(3) + l * l;
        assert_eq!(w.symmetrize(f, 0.7), w.symmetrize(f, -0.7));
        assert_eq!(w.group_order, 2);
    }
}
