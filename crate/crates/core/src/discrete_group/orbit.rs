//! Breadth-first orbit enumeration over reduced words.
//!
//! Completeness certificates:
//!
//! * cyclic `⟨g⟩`: `d(x, gᵏy) ≥ |k|ℓ − d(x, y)`, so the search stops once
//!   `|k|ℓ − d(x, y) > R`;
//! * Schottky with basepoint `y` in the Ford domain: every extension of the
//!   reduced word `w = g₁⋯g_L` moves `y` into the nested half-ball
//!   `g₁⋯g_{L−1}(D(g_L⁻¹))`, where `D(h)` is the inside of the isometric
//!   circle of `h`. A branch is pruned once `x` is farther than `R` from it.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::{circumcircle, distance_to_half_ball, distance_unchecked, Mat2, Model, Point};
use super::{DiscreteGroup, GroupKind};
use crate::error::{domain, Result};

/// Projective dedup tolerance, relative to `max(1, ‖γ‖)`.
const DEDUP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitEntry {
    /// Letters: `i < k` is generator `i`, `i ≥ k` its inverse.
    pub word: Vec<usize>,
    pub matrix: Mat2,
    /// `d(x, γ y)`.
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct GroupOrbit {
    pub entries: Vec<OrbitEntry>,
    pub x: Point,
    pub y: Point,
    /// All `γ` with `d(x, γy) ≤ radius` are present.
    pub complete: bool,
    /// Radius the completeness flag refers to (∞ when only a word-length limit was used).
    pub radius: f64,
    /// Longest word length explored.
    pub depth: usize,
    /// Number of reduced words generated (before radius filtering).
    pub words_explored: usize,
    /// Distinct elements per word length, `count_by_length[L]`.
    pub count_by_length: Vec<usize>,
}

impl GroupOrbit {
    pub fn distances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.distance).collect()
    }

    /// `#{γ : d(x, γy) ≤ r}` over the enumerated entries.
    pub fn count_within(&self, r: f64) -> usize {
        self.entries.iter().filter(|e| e.distance <= r).count()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OrbitLimits {
    pub radius: Option<f64>,
    pub max_length: Option<usize>,
    /// Hard cap on generated words.
    pub budget: usize,
}

impl OrbitLimits {
    pub fn radius(r: f64) -> Self {
        Self {
            radius: Some(r),
            max_length: None,
            budget: 2_000_000,
        }
    }

    pub fn length(l: usize) -> Self {
        Self {
            radius: None,
            max_length: Some(l),
            budget: 2_000_000,
        }
    }
}

struct Node {
    word: Vec<usize>,
    matrix: Mat2,
    /// `g₁⋯g_{L−1}`.
    prefix: Mat2,
}

/// Hash buckets for `PSL(2, C)` dedup, keyed on the sign-invariant
/// quantities `(|a|², |b|², |c|²)`.
struct Dedup {
    buckets: HashMap<[i64; 3], Vec<Mat2>>,
}

impl Dedup {
    fn new() -> Self {
        Self {
            buckets: HashMap::new(),
        }
    }

    fn key(m: &Mat2) -> ([i64; 3], f64) {
        let n = m.frobenius().max(1.0);
        let tol = DEDUP_TOL * n;
        let cell = 8.0 * tol * n;
        let q = |z: Complex64| (z.norm_sqr() / cell).floor() as i64;
        ([q(m.a), q(m.b), q(m.c)], tol)
    }

    /// Inserts `m`; returns false if an equal element (up to sign) is present.
    fn insert(&mut self, m: &Mat2) -> bool {
        let (k, tol) = Self::key(m);
        for i in -1..=1 {
            for j in -1..=1 {
                for l in -1..=1 {
                    if let Some(list) = self.buckets.get(&[k[0] + i, k[1] + j, k[2] + l]) {
                        if list.iter().any(|o| o.projective_distance(m) <= tol) {
                            return false;
                        }
                    }
                }
            }
        }
        self.buckets.entry(k).or_default().push(*m);
        true
    }
}

pub fn enumerate_orbit(group: &DiscreteGroup, x: &Point, y: &Point, limits: OrbitLimits) -> Result<GroupOrbit> {
    x.check()?;
    y.check()?;
    if x.model != group.model || y.model != group.model {
        return domain("basepoints must lie in the group's model");
    }
    if limits.radius.is_none() && limits.max_length.is_none() {
        return domain("orbit enumeration needs a radius or a maximum word length");
    }
    if let Some(r) = limits.radius {
        if !(r > 0.0) {
            return domain(format!("radius must be positive, got {r}"));
        }
    }
    let radius = limits.radius.unwrap_or(f64::INFINITY);
    let max_len = limits.max_length.unwrap_or(usize::MAX);
    let alphabet = group.alphabet();
    let letters = &alphabet;
    let k = group.generators.len();
    let inverse_of = |i: usize| if i < k { i + k } else { i - k };
    let d_xy = distance_unchecked(x, y);

    let schottky_discs = match group.kind {
        GroupKind::Schottky if in_ford_domain(group, y) => group.isometric_circles(),
        _ => None,
    };
    let cyclic_ell = match group.kind {
        GroupKind::Cyclic { ell } => Some(ell),
        _ => None,
    };

    let free = matches!(group.kind, GroupKind::Schottky | GroupKind::Cyclic { .. });
    let accept = |d: f64| d <= radius * (1.0 + 1e-12) + 1e-12;
    let mut dedup = Dedup::new();
    dedup.insert(&Mat2::identity());
    let mut entries = Vec::new();
    if accept(d_xy) {
        entries.push(OrbitEntry {
            word: Vec::new(),
            matrix: Mat2::identity(),
            distance: d_xy,
        });
    }
    let mut count_by_length = vec![1];
    let mut frontier = vec![Node {
        word: Vec::new(),
        matrix: Mat2::identity(),
        prefix: Mat2::identity(),
    }];
    let mut explored = 0usize;
    let mut depth = 0usize;
    let mut complete = letters.is_empty();
    let mut budget_hit = false;

    while !frontier.is_empty() && depth < max_len {
        depth += 1;
        let children: Vec<Node> = frontier
            .iter()
            .flat_map(|node| {
                let last = node.word.last().copied();
                (0..letters.len())
                    .filter(move |&i| last.is_none_or(|l| inverse_of(l) != i))
                    .map(move |i| {
                        let mut word = node.word.clone();
                        word.push(i);
                        Node {
                            word,
                            matrix: node.matrix * letters[i],
                            prefix: node.matrix,
                        }
                    })
            })
            .collect();
        explored += children.len();
        if explored > limits.budget {
            budget_hit = true;
            break;
        }
        // Distances and pruning tests in parallel; order is restored by collect.
        let evaluated: Vec<(f64, bool)> = children
            .par_iter()
            .map(|c| {
                let d = distance_unchecked(x, &c.matrix.act(y));
                let keep = match (&schottky_discs, cyclic_ell) {
                    (Some(discs), _) => {
                        let last = *c.word.last().expect("nonempty word");
                        nested_region_distance(group.model, &c.prefix, discs[inverse_of(last)], x) <= radius
                    }
                    (None, Some(ell)) => (c.word.len() as f64) * ell - d_xy <= radius,
                    _ => true,
                };
                (d, keep)
            })
            .collect();
        let mut next = Vec::new();
        let mut level_count = 0usize;
        for (child, (d, keep)) in children.into_iter().zip(evaluated) {
            // Reduced words in a certified free group are distinct elements.
            if !free && !dedup.insert(&child.matrix) {
                continue;
            }
            level_count += 1;
            if accept(d) {
                entries.push(OrbitEntry {
                    word: child.word.clone(),
                    matrix: child.matrix,
                    distance: d,
                });
            }
            if keep {
                next.push(child);
            }
        }
        count_by_length.push(level_count);
        frontier = next;
        if frontier.is_empty() && (schottky_discs.is_some() || cyclic_ell.is_some()) && radius.is_finite() {
            complete = true;
        }
    }
    if radius.is_infinite() && !budget_hit {
        // Word-length enumeration is complete for its own horizon.
        complete = frontier.is_empty() || depth >= max_len;
    }
    if budget_hit {
        complete = false;
    }
    Ok(GroupOrbit {
        entries,
        x: *x,
        y: *y,
        complete,
        radius,
        depth,
        words_explored: explored,
        count_by_length,
    })
}

/// `y` lies outside every isometric circle.
pub(crate) fn in_ford_domain(group: &DiscreteGroup, y: &Point) -> bool {
    group.isometric_circles().is_some_and(|circles| {
        circles.iter().all(|&(m, r)| {
            let along = match y.model {
                Model::UpperHalfPlane => (y.z - m).norm_sqr(),
                Model::UpperHalfSpace => (y.z - m).norm_sqr() + y.h * y.h,
            };
            along > r * r
        })
    })
}

/// Distance from `x` to `prefix(D)` for a boundary disc `D = (centre, radius)`.
fn nested_region_distance(model: Model, prefix: &Mat2, disc: (Complex64, f64), x: &Point) -> f64 {
    let (m, r) = disc;
    let pts = match model {
        Model::UpperHalfPlane => [m - r, m + r, m - r],
        Model::UpperHalfSpace => [m + r, m + Complex64::new(0.0, r), m - r],
    };
    let img: Option<Vec<Complex64>> = pts.iter().map(|&p| prefix.act_boundary(p)).collect();
    let Some(img) = img else {
        return 0.0;
    };
    let (centre, radius) = match model {
        Model::UpperHalfPlane => {
            let (lo, hi) = if img[0].re < img[1].re { (img[0].re, img[1].re) } else { (img[1].re, img[0].re) };
            (Complex64::new(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo))
        }
        Model::UpperHalfSpace => match circumcircle(img[0], img[1], img[2]) {
            Some(c) => c,
            None => return 0.0,
        },
    };
    distance_to_half_ball(x, centre, radius)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Growth {
    /// `#{g : |g| ≤ n}`.
    pub value: usize,
    /// Cumulative counts for `0..=n`.
    pub cumulative: Vec<usize>,
    /// `log γ(n)/n` is decreasing towards 0 over the computed range.
    pub subexponential: bool,
    /// Budget exhausted before reaching `n`.
    pub partial: bool,
}

pub fn growth_function(group: &DiscreteGroup, n: usize) -> Result<Growth> {
    growth_function_with_budget(group, n, 5_000_000)
}

pub fn growth_function_with_budget(group: &DiscreteGroup, n: usize, budget: usize) -> Result<Growth> {
    let base = group.model.origin();
    let orbit = enumerate_orbit(
        group,
        &base,
        &base,
        OrbitLimits {
            radius: None,
            max_length: Some(n),
            budget,
        },
    )?;
    let mut cumulative = Vec::with_capacity(orbit.count_by_length.len());
    let mut acc = 0usize;
    for &c in &orbit.count_by_length {
        acc += c;
        cumulative.push(acc);
    }
    let partial = !orbit.complete;
    let rates: Vec<f64> = cumulative
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| (c as f64).ln() / k as f64)
        .collect();
    let subexponential = rates.len() >= 2 && rates.windows(2).all(|w| w[1] <= w[0] + 1e-12) && rates.last().is_some_and(|&r| r < 0.5 * rates[0].max(1e-12));
    Ok(Growth {
        value: *cumulative.last().unwrap_or(&1),
        cumulative,
        subexponential,
        partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_group_has_one_entry() {
        let g = DiscreteGroup::trivial(Model::UpperHalfPlane);
        let o = Model::UpperHalfPlane.origin();
        let orbit = enumerate_orbit(&g, &o, &o, OrbitLimits::radius(3.0)).unwrap();
        assert_eq!(orbit.entries.len(), 1);
        assert!(orbit.complete);
    }

    #[test]
    fn cyclic_orbit_on_axis() {
        let g = DiscreteGroup::cyclic(Model::UpperHalfSpace, 1.0).unwrap();
        let o = Model::UpperHalfSpace.origin();
        let orbit = enumerate_orbit(&g, &o, &o, OrbitLimits::radius(5.0)).unwrap();
        assert!(orbit.complete);
        let mut d = orbit.distances();
        d.sort_by(f64::total_cmp);
        let expect = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 5.0, 5.0];
        assert_eq!(d.len(), expect.len());
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn schottky_word_counts() {
        let g = DiscreteGroup::default_schottky(Model::UpperHalfPlane);
        let o = Model::UpperHalfPlane.origin();
        let orbit = enumerate_orbit(&g, &o, &o, OrbitLimits::length(6)).unwrap();
        for (l, &c) in orbit.count_by_length.iter().enumerate().skip(1) {
            assert_eq!(c, 4 * 3usize.pow(l as u32 - 1));
        }
    }

    #[test]
    fn schottky_radius_certificate_matches_exhaustive_search() {
        let g = DiscreteGroup::default_schottky(Model::UpperHalfPlane);
        let o = Model::UpperHalfPlane.origin();
        let r = 9.0;
        let cert = enumerate_orbit(&g, &o, &o, OrbitLimits::radius(r)).unwrap();
        assert!(cert.complete);
        let brute = enumerate_orbit(&g, &o, &o, OrbitLimits::length(11)).unwrap();
        assert_eq!(cert.count_within(r), brute.count_within(r));
        assert!(cert.words_explored < brute.words_explored);
    }

    #[test]
    fn dedup_identifies_relations() {
        // g and g³ generate the same cyclic group; words collapse.
        let g = Mat2::real(2f64.exp().sqrt(), 0.0, 0.0, (-1.0f64).exp());
        let g3 = g * g * g;
        let group = DiscreteGroup::new(Model::UpperHalfPlane, vec![g, g3], "redundant").unwrap();
        let grow = growth_function(&group, 1).unwrap();
        // {e, g^{±1}, g^{±3}}
        assert_eq!(grow.value, 5);
    }

    #[test]
    fn growth_examples() {
        let base = Model::UpperHalfPlane;
        assert_eq!(growth_function(&DiscreteGroup::default_schottky(base), 0).unwrap().value, 1);
        let cyc = growth_function(&DiscreteGroup::cyclic(base, 1.0).unwrap(), 5).unwrap();
        assert_eq!(cyc.value, 11);
        assert!(cyc.subexponential);
        let free = growth_function(&DiscreteGroup::default_schottky(base), 2).unwrap();
        assert_eq!(free.value, 17);
        assert!(!free.subexponential);
    }
}
