//! Discrete groups acting on H² and H³: orbit enumeration with completeness
//! certificates, Poincaré series, critical exponents, growth, automorphic
//! kernels and Monte Carlo norms on the quotient.

pub mod automorphic;
pub mod fundamental_domain;
pub mod matrix;
pub mod orbit;
pub mod poincare;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lie_data::RankOneSpace;

pub use automorphic::{automorphic_kernel, automorphic_kernel_with, AutomorphicValue, KernelEnvelope, KernelEvaluator};
pub use fundamental_domain::{
    orbit_sum_cutoff, periodized_integrals, quotient_lq_norm, quotient_lq_norm_gaussian, unfolding_check, McConfig, McEstimate, Moments,
    UnfoldingCheck,
};
pub use matrix::{hyperbolic_distance, Mat2, Model, Point};
pub use orbit::{enumerate_orbit, growth_function, growth_function_with_budget, GroupOrbit, Growth, OrbitEntry, OrbitLimits};
pub use poincare::{critical_exponent_estimate, critical_exponent_with_budget, poincare_series, CriticalExponent, PoincareResult};

/// Structural information used for certificates and fundamental domains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GroupKind {
    Trivial,
    /// Generated by one hyperbolic/loxodromic element of translation length `ell`.
    Cyclic { ell: f64 },
    /// Free group whose generators and inverses have pairwise disjoint
    /// isometric circles (classical Schottky, Ford domain = common exterior).
    Schottky,
    /// No certificate available.
    Generic,
}

#[derive(Clone, Debug)]
pub struct DiscreteGroup {
    pub model: Model,
    pub generators: Vec<Mat2>,
    pub label: String,
    pub kind: GroupKind,
}

impl DiscreteGroup {
    /// Validates unimodularity (|det − 1| ≤ 1e−12, real entries on H²) and
    /// classifies the group.
    pub fn new(model: Model, generators: Vec<Mat2>, label: impl Into<String>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if (g.det() - 1.0).norm() > 1e-12 {
                return domain(format!("generator {i} has det {} (need |det - 1| <= 1e-12)", g.det()));
            }
            if model == Model::UpperHalfPlane && !g.is_real() {
                return domain(format!("generator {i} must have real entries to act on H2"));
            }
        }
        let kind = classify(&generators);
        Ok(Self {
            model,
            generators,
            label: label.into(),
            kind,
        })
    }

    pub fn trivial(model: Model) -> Self {
        Self {
            model,
            generators: Vec::new(),
            label: "trivial".into(),
            kind: GroupKind::Trivial,
        }
    }

    /// `⟨diag(e^{ℓ/2}, e^{−ℓ/2})⟩`: translation along the vertical axis through the basepoint.
    pub fn cyclic(model: Model, ell: f64) -> Result<Self> {
        if !(ell > 0.0) {
            return domain(format!("translation length must be positive, got {ell}"));
        }
        let g = Mat2::real((ell / 2.0).exp(), 0.0, 0.0, (-ell / 2.0).exp());
        Self::new(model, vec![g], format!("cyclic(ell={ell})"))
    }

    /// Two hyperbolic generators `A = [[cosh u, sinh u], [sinh u, cosh u]]`
    /// and `B = diag(√k, 1/√k) A diag(1/√k, √k)`; defaults `u = 1.5`, `k = 4`
    /// give disjoint isometric circles around ±coth u and ±k coth u.
    pub fn schottky(model: Model, u: f64, k: f64) -> Result<Self> {
        let (c, s) = (u.cosh(), u.sinh());
        let a = Mat2::real(c, s, s, c);
        let b = Mat2::real(c, k * s, s / k, c);
        let g = Self::new(model, vec![a, b], format!("schottky(u={u},k={k})"))?;
        if g.kind != GroupKind::Schottky {
            return domain(format!("u = {u}, k = {k} do not give disjoint isometric circles"));
        }
        Ok(g)
    }

    pub fn default_schottky(model: Model) -> Self {
        Self::schottky(model, 1.5, 4.0).expect("default Schottky parameters are valid")
    }

    /// Generators followed by their inverses; letter `i` has inverse `(i + k) mod 2k`.
    pub fn alphabet(&self) -> Vec<Mat2> {
        let mut letters = self.generators.clone();
        letters.extend(self.generators.iter().map(|g| g.inverse()));
        letters
    }

    pub fn space(&self) -> RankOneSpace {
        match self.model {
            Model::UpperHalfPlane => RankOneSpace::h2(),
            Model::UpperHalfSpace => RankOneSpace::h3(),
        }
    }

    /// Isometric circles of all letters (Schottky groups only).
    pub fn isometric_circles(&self) -> Option<Vec<(Complex64, f64)>> {
        self.alphabet().iter().map(|m| m.isometric_circle()).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: GroupFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse(format!("group file, field `{path}` (line {} column {}): {inner}", inner.line(), inner.column()))
        })?;
        let generators = file
            .generators
            .iter()
            .map(|g| Mat2::new(g[0][0].into(), g[0][1].into(), g[1][0].into(), g[1][1].into()))
            .collect();
        Self::new(file.model, generators, file.label).map_err(|e| match e {
            Error::Domain(m) => Error::Parse(format!("generators: {m}")),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let file = GroupFile {
            model: self.model,
            generators: self
                .generators
                .iter()
                .map(|g| [[g.a.into(), g.b.into()], [g.c.into(), g.d.into()]])
                .collect(),
            label: self.label.clone(),
        };
        serde_json::to_string_pretty(&file).expect("group file serializes")
    }
}

fn classify(generators: &[Mat2]) -> GroupKind {
    match generators.len() {
        0 => GroupKind::Trivial,
        1 => {
            let ell = generators[0].translation_length();
            if ell > 1e-9 {
                GroupKind::Cyclic { ell }
            } else {
                GroupKind::Generic
            }
        }
        _ => {
            let mut circles = Vec::new();
            for g in generators.iter().chain(generators.iter().map(|g| g.inverse()).collect::<Vec<_>>().iter()) {
                match g.isometric_circle() {
                    Some(c) => circles.push(c),
                    None => return GroupKind::Generic,
                }
            }
            let disjoint = (0..circles.len()).all(|i| {
                (i + 1..circles.len()).all(|j| (circles[i].0 - circles[j].0).norm() > circles[i].1 + circles[j].1 + 1e-12)
            });
            if disjoint {
                GroupKind::Schottky
            } else {
                GroupKind::Generic
            }
        }
    }
}

/// Complex entry written as `[re, im]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct Entry([f64; 2]);

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        Complex64::new(e.0[0], e.0[1])
    }
}

impl From<Complex64> for Entry {
    fn from(z: Complex64) -> Self {
        Entry([z.re, z.im])
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    model: Model,
    generators: Vec<[[Entry; 2]; 2]>,
    label: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_classification() {
        assert_eq!(DiscreteGroup::trivial(Model::UpperHalfSpace).kind, GroupKind::Trivial);
        match DiscreteGroup::cyclic(Model::UpperHalfSpace, 1.0).unwrap().kind {
            GroupKind::Cyclic { ell } => assert!((ell - 1.0).abs() < 1e-12),
            k => panic!("{k:?}"),
        }
        assert_eq!(DiscreteGroup::default_schottky(Model::UpperHalfPlane).kind, GroupKind::Schottky);
        assert!(DiscreteGroup::schottky(Model::UpperHalfPlane, 0.3, 1.2).is_err());
    }

    #[test]
    fn rejects_non_unimodular() {
        let err = DiscreteGroup::new(Model::UpperHalfPlane, vec![Mat2::real(2.0, 0.0, 0.0, 1.0)], "bad").unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let g = DiscreteGroup::default_schottky(Model::UpperHalfSpace);
        let back = DiscreteGroup::from_json(&g.to_json()).unwrap();
        assert_eq!(back.generators, g.generators);
        assert_eq!(back.kind, GroupKind::Schottky);

        let missing = r#"{"model": "upper_half_plane_H2", "label": "x"}"#;
        let err = DiscreteGroup::from_json(missing).unwrap_err().to_string();
        assert!(err.contains("generators"), "{err}");
        let unknown = r#"{"model": "upper_half_plane_H2", "generators": [], "label": "x", "extra": 1}"#;
        assert!(DiscreteGroup::from_json(unknown).unwrap_err().to_string().contains("extra"));
        let bad_model = r#"{"model": "disc", "generators": [], "label": "x"}"#;
        assert!(DiscreteGroup::from_json(bad_model).is_err());
        let bad_entry = r#"{"model": "upper_half_plane_H2", "generators": [[[[1, 0], [0, 0]], [[0, 0], "x"]]], "label": "x"}"#;
        let err = DiscreteGroup::from_json(bad_entry).unwrap_err().to_string();
        assert!(err.contains("generators[0][1][1]"), "{err}");
    }
}
