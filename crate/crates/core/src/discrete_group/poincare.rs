//! Poincaré series and critical-exponent estimates.

use serde::{Deserialize, Serialize};

use super::matrix::{distance_unchecked, Mat2, Point};
use super::orbit::{enumerate_orbit, OrbitLimits};
use super::{DiscreteGroup, GroupKind};
use crate::error::{domain, Error, Result};
use crate::kernels::least_squares_slope;
use crate::quad::CompensatedSum;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoincareResult {
    pub s: f64,
    pub partial_sum: f64,
    /// Estimated remainder; infinite when the series looks divergent.
    pub tail_bound: f64,
    pub terms_used: usize,
    /// Level sums `Z_L(s)` by word length.
    pub level_sums: Vec<f64>,
    /// The level sums do not decay geometrically (`s` at or below `δ(Γ)`).
    pub divergent: bool,
}

/// `Σ_γ e^{−s d(x, γy)}`.
///
/// Cyclic groups are summed in `|k|` with the bound `d(x, gᵏy) ≥ |k|ℓ − d(x,y)`;
/// other groups by word length with a geometric tail from the last level ratios.
pub fn poincare_series(group: &DiscreteGroup, s: f64, x: &Point, y: &Point, budget: usize) -> Result<PoincareResult> {
    if !(s > 0.0) {
        return domain(format!("Poincaré exponent must be positive, got {s}"));
    }
    x.check()?;
    y.check()?;
    let d_xy = distance_unchecked(x, y);
    match group.kind {
        GroupKind::Trivial => Ok(PoincareResult {
            s,
            partial_sum: (-s * d_xy).exp(),
            tail_bound: 0.0,
            terms_used: 1,
            level_sums: vec![(-s * d_xy).exp()],
            divergent: false,
        }),
        GroupKind::Cyclic { ell } => Ok(cyclic_series(group.generators[0], ell, s, x, y, d_xy, budget)),
        _ => word_length_series(group, s, x, y, budget),
    }
}

fn cyclic_series(g: Mat2, ell: f64, s: f64, x: &Point, y: &Point, d_xy: f64, budget: usize) -> PoincareResult {
    let ginv = g.inverse();
    let mut sum = CompensatedSum::new();
    sum.add((-s * d_xy).exp());
    let mut levels = vec![(-s * d_xy).exp()];
    let (mut fwd, mut bwd) = (g, ginv);
    let mut k = 0usize;
    let remainder = |k: usize| {
        let lead = s * ((k as f64 + 1.0) * ell - d_xy);
        2.0 * (-lead).exp() / (-(s * ell)).exp_m1().abs()
    };
    loop {
        k += 1;
        let level = (-s * distance_unchecked(x, &fwd.act(y))).exp() + (-s * distance_unchecked(x, &bwd.act(y))).exp();
        sum.add(level);
        levels.push(level);
        fwd = fwd * g;
        bwd = bwd * ginv;
        let tail = remainder(k);
        if tail < 1e-17 * sum.value() || 2 * k + 1 >= budget {
            return PoincareResult {
                s,
                partial_sum: sum.value(),
                tail_bound: tail,
                terms_used: 2 * k + 1,
                level_sums: levels,
                divergent: false,
            };
        }
    }
}

fn level_distances(group: &DiscreteGroup, x: &Point, y: &Point, budget: usize) -> Result<Vec<Vec<f64>>> {
    let orbit = enumerate_orbit(
        group,
        x,
        y,
        OrbitLimits {
            radius: None,
            max_length: Some(max_length_for_budget(group, budget)),
            budget,
        },
    )?;
    let mut levels = vec![Vec::new(); orbit.depth + 1];
    for e in &orbit.entries {
        levels[e.word.len()].push(e.distance);
    }
    while levels.last().is_some_and(|l| l.is_empty()) {
        levels.pop();
    }
    Ok(levels)
}

/// Longest word length whose free-group ball fits in the budget.
fn max_length_for_budget(group: &DiscreteGroup, budget: usize) -> usize {
    let letters = 2 * group.generators.len();
    if letters <= 2 {
        // Matrix entries grow like e^{Lℓ/2}; stay far from overflow.
        let cap = match group.kind {
            GroupKind::Cyclic { ell } => ((600.0 / ell) as usize).clamp(3, 256),
            _ => 256,
        };
        return (budget / 2).min(cap);
    }
    let mut total = 1usize;
    let mut level = 1usize;
    let mut l = 0;
    loop {
        let next = if l == 0 { letters } else { level * (letters - 1) };
        if total + next > budget || l >= 40 {
            return l.max(1);
        }
        total += next;
        level = next;
        l += 1;
    }
}

fn word_length_series(group: &DiscreteGroup, s: f64, x: &Point, y: &Point, budget: usize) -> Result<PoincareResult> {
    let levels = level_distances(group, x, y, budget)?;
    Ok(series_from_levels(s, &levels))
}

fn level_sums(s: f64, levels: &[Vec<f64>]) -> Vec<f64> {
    levels
        .iter()
        .map(|l| {
            let mut acc = CompensatedSum::new();
            for &d in l {
                acc.add((-s * d).exp());
            }
            acc.value()
        })
        .collect()
}

fn series_from_levels(s: f64, levels: &[Vec<f64>]) -> PoincareResult {
    let sums = level_sums(s, levels);
    let mut total = CompensatedSum::new();
    for &z in &sums {
        total.add(z);
    }
    let terms: usize = levels.iter().map(|l| l.len()).sum();
    let n = sums.len();
    let (tail, divergent) = if n >= 3 {
        let q = (sums[n - 1] / sums[n - 2]).max(sums[n - 2] / sums[n - 3]);
        if q < 1.0 {
            (sums[n - 1] * q / (1.0 - q), false)
        } else {
            (f64::INFINITY, true)
        }
    } else {
        (f64::INFINITY, true)
    };
    PoincareResult {
        s,
        partial_sum: total.value(),
        tail_bound: tail,
        terms_used: terms,
        level_sums: sums,
        divergent,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalExponent {
    /// Root of the word-length pressure `log(Z_L/Z_{L−1})`.
    pub value: f64,
    /// Half-width of the reported interval.
    pub half_width: f64,
    /// Least-squares slope of `log #{d(x, γx) ≤ R}` against `R`.
    pub counting_slope: f64,
    pub counting_stderr: f64,
    pub pressure_root: f64,
    /// Fewer than 20 orbit points or an incomplete enumeration.
    pub wide_interval: bool,
    /// Radii and counts used by the counting fit.
    pub counts: Vec<(f64, usize)>,
}

impl CriticalExponent {
    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }

    /// Class-(S₀) gate `δ̂ + half-width < ρ_m`.
    pub fn admits(&self, rho_m: f64) -> bool {
        self.upper() < rho_m
    }
}

/// δ(Γ) from two estimators: the pressure root on word-length level sums
/// and the orbit-counting slope. The interval half-width is twice the slope
/// standard error plus the disagreement of the two.
pub fn critical_exponent_estimate(group: &DiscreteGroup) -> Result<CriticalExponent> {
    critical_exponent_with_budget(group, 400_000)
}

pub fn critical_exponent_with_budget(group: &DiscreteGroup, budget: usize) -> Result<CriticalExponent> {
    let x = group.model.origin();
    if group.kind == GroupKind::Trivial {
        return Ok(CriticalExponent {
            value: 0.0,
            half_width: 0.0,
            counting_slope: 0.0,
            counting_stderr: 0.0,
            pressure_root: 0.0,
            wide_interval: false,
            counts: vec![(0.0, 1)],
        });
    }
    let levels = level_distances(group, &x, &x, budget)?;
    let pressure_root = pressure_root(&levels, 2.0 * group.space().rho + 1.0);

    // Counting over a certified radius, grown until the budget binds.
    let certified = matches!(group.kind, GroupKind::Cyclic { .. } | GroupKind::Schottky);
    let mut r_max: f64 = 8.0;
    let mut orbit = enumerate_orbit(group, &x, &x, OrbitLimits { radius: Some(r_max), max_length: None, budget })?;
    if certified {
        while orbit.complete && orbit.entries.len() < budget / 8 && r_max < 60.0 {
            let bigger = enumerate_orbit(group, &x, &x, OrbitLimits { radius: Some(r_max + 4.0), max_length: None, budget })?;
            if !bigger.complete {
                break;
            }
            r_max += 4.0;
            orbit = bigger;
        }
    } else {
        orbit = enumerate_orbit(group, &x, &x, OrbitLimits::length(max_length_for_budget(group, budget)))?;
        r_max = orbit.distances().iter().copied().fold(0.0, f64::max) * 0.5;
    }
    let mut dists = orbit.distances();
    dists.sort_by(f64::total_cmp);
    let counts: Vec<(f64, usize)> = (0..=16)
        .map(|i| r_max * (0.5 + 0.5 * i as f64 / 16.0))
        .map(|r| (r, dists.partition_point(|&d| d <= r)))
        .collect();
    let pts: Vec<(f64, f64)> = counts.iter().map(|&(r, c)| (r, (c as f64).ln())).collect();
    let (counting_slope, counting_stderr) =
        least_squares_slope(&pts).ok_or_else(|| Error::Numerical { message: "orbit counting fit is degenerate".into(), residual: f64::NAN })?;
    let wide_interval = !orbit.complete || dists.len() < 20;
    let half_width = 2.0 * counting_stderr + (counting_slope - pressure_root).abs();
    Ok(CriticalExponent {
        value: pressure_root,
        half_width,
        counting_slope,
        counting_stderr,
        pressure_root,
        wide_interval,
        counts,
    })
}

/// Bisection for `Z_L(s) = Z_{L−1}(s)` at the deepest level; 0 if the ratio
/// is ≤ 1 already at `s = 0`.
fn pressure_root(levels: &[Vec<f64>], s_hi: f64) -> f64 {
    let n = levels.len();
    if n < 3 {
        return 0.0;
    }
    let ratio = |s: f64| {
        let sums = level_sums(s, &levels[n - 2..]);
        (sums[1] / sums[0]).ln()
    };
    if ratio(0.0) <= 1e-12 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, s_hi);
    while ratio(hi) > 0.0 && hi < 64.0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_group::Model;

    #[test]
    fn cyclic_series_matches_coth() {
        for &ell in &[0.5, 1.0, 2.0] {
            let g = DiscreteGroup::cyclic(Model::UpperHalfSpace, ell).unwrap();
            let o = Model::UpperHalfSpace.origin();
            for &s in &[0.5, 1.0, 2.0] {
                let p = poincare_series(&g, s, &o, &o, 1_000_000).unwrap();
                let exact = 1.0 / (s * ell / 2.0).tanh();
                assert!((p.partial_sum - exact).abs() < 1e-10, "s={s} ell={ell}");
                assert!(p.tail_bound < 1e-10);
            }
        }
    }

    #[test]
    fn large_exponent_leaves_identity() {
        let g = DiscreteGroup::default_schottky(Model::UpperHalfPlane);
        let o = Model::UpperHalfPlane.origin();
        let p = poincare_series(&g, 50.0, &o, &o, 20_000).unwrap();
        assert!((p.partial_sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_sums_monotone_in_budget() {
        let g = DiscreteGroup::default_schottky(Model::UpperHalfPlane);
        let o = Model::UpperHalfPlane.origin();
        let mut last = 0.0;
        for budget in [100, 1000, 10_000, 50_000] {
            let p = poincare_series(&g, 0.8, &o, &o, budget).unwrap();
            assert!(p.partial_sum >= last);
            last = p.partial_sum;
        }
    }

    #[test]
    fn converges_above_twice_rho() {
        for g in [
            DiscreteGroup::default_schottky(Model::UpperHalfPlane),
            DiscreteGroup::default_schottky(Model::UpperHalfSpace),
            DiscreteGroup::cyclic(Model::UpperHalfPlane, 1.0).unwrap(),
        ] {
            let o = g.model.origin();
            let s = 2.0 * g.space().rho + 0.1;
            let p = poincare_series(&g, s, &o, &o, 50_000).unwrap();
            assert!(!p.divergent && p.tail_bound.is_finite(), "{}", g.label);
        }
    }

    #[test]
    fn cyclic_critical_exponent_is_zero() {
        let g = DiscreteGroup::cyclic(Model::UpperHalfSpace, 1.0).unwrap();
        let ce = critical_exponent_estimate(&g).unwrap();
        assert!(ce.value <= 0.05 && ce.half_width <= 0.05, "{ce:?}");
        assert!(ce.admits(1.0));
    }

    #[test]
    fn schottky_critical_exponent_bracketed() {
        let g = DiscreteGroup::default_schottky(Model::UpperHalfPlane);
        let ce = critical_exponent_estimate(&g).unwrap();
        assert!(ce.value > 0.0 && ce.value < 1.0, "{ce:?}");
        let o = Model::UpperHalfPlane.origin();
        // Convergent trend above the estimate, divergent well below it.
        assert!(!poincare_series(&g, ce.value + 0.15, &o, &o, 200_000).unwrap().divergent);
        assert!(poincare_series(&g, (ce.value - 0.15).max(0.01), &o, &o, 200_000).unwrap().divergent);
    }
}
