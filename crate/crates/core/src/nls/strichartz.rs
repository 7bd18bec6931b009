//! Admissible exponent triangle, Strichartz quotients of solver runs and the
//! `TT*` kernel norms.

use serde::{Deserialize, Serialize};

use super::duhamel::NlsRun;
use crate::error::{domain, Result};
use crate::quad::GaussLegendre;

const ADMISSIBLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub p: f64,
    pub q: f64,
    pub n: u32,
}

impl AdmissiblePair {
    pub fn new(n: u32, p: f64, q: f64) -> Result<Self> {
        if !is_admissible(n, p, q) {
            return domain(format!("(p, q) = ({p}, {q}) is not admissible for n = {n}"));
        }
        Ok(Self { p, q, n })
    }
}

/// `(1/p, 1/q)` lies in `(0, 1/2] × (0, 1/2)` with `2/p + n/q ≥ n/2`, or is
/// the endpoint `(0, 1/2)`. `p` and `q` may be infinite.
pub fn is_admissible(n: u32, p: f64, q: f64) -> bool {
    if !(p > 0.0) || !(q > 0.0) || n == 0 {
        return false;
    }
    let (x, y) = (1.0 / p, 1.0 / q);
    let nf = n as f64;
    if x <= ADMISSIBLE_TOL && (y - 0.5).abs() <= ADMISSIBLE_TOL {
        return true;
    }
    let in_box = x > ADMISSIBLE_TOL && x <= 0.5 + ADMISSIBLE_TOL && y > ADMISSIBLE_TOL && y < 0.5 - ADMISSIBLE_TOL;
    in_box && 2.0 * x + nf * y >= nf / 2.0 - ADMISSIBLE_TOL
}

/// Parse `"p,q;p~,q~"` (entries may be `inf`).
pub fn parse_pairs(s: &str) -> Result<((f64, f64), (f64, f64))> {
    let parse = |t: &str| -> Result<f64> {
        let t = t.trim();
        if t.eq_ignore_ascii_case("inf") {
            Ok(f64::INFINITY)
        } else {
            t.parse::<f64>()
                .map_err(|e| crate::Error::Parse(format!("bad exponent {t:?}: {e}")))
        }
    };
    let halves: Vec<&str> = s.split(';').collect();
    if halves.len() != 2 {
        return Err(crate::Error::Parse(format!("expected \"p,q;p~,q~\", got {s:?}")));
    }
    let mut out = [(0.0, 0.0); 2];
    for (o, h) in out.iter_mut().zip(&halves) {
        let v: Vec<&str> = h.split(',').collect();
        if v.len() != 2 {
            return Err(crate::Error::Parse(format!("expected two exponents in {h:?}")));
        }
        *o = (parse(v[0])?, parse(v[1])?);
    }
    Ok((out[0], out[1]))
}

fn dual(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Spatial exponents a run must record to evaluate [`strichartz_quotient`].
pub fn exponents_for(gamma: f64, pair: (f64, f64), dual_pair: (f64, f64)) -> Vec<f64> {
    vec![pair.1, gamma * dual(dual_pair.1)]
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StrichartzQuotient {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// Zero data: `0/0` reported as 0.
    pub degenerate: bool,
}

/// `‖u‖_{L^p_t L^q_x} / (‖f‖₂ + ‖F(u)‖_{L^{p̃′}_t L^{q̃′}_x})` over the run.
pub fn strichartz_quotient(run: &NlsRun, pair: (f64, f64), dual_pair: (f64, f64)) -> Result<StrichartzQuotient> {
    for (p, q) in [pair, dual_pair] {
        if !is_admissible(3, p, q) {
            return domain(format!("(p, q) = ({p}, {q}) is not admissible on H3"));
        }
    }
    let norms = &run.norms;
    let missing = |q: f64| crate::Error::Domain(format!("L^{q} norms were not recorded by this run"));
    let u_q = norms.series(pair.1).ok_or_else(|| missing(pair.1))?;
    let numerator = norms.time_norm(u_q, pair.0);
    let g = run.gamma;
    let qf = g * dual(dual_pair.1);
    let forcing = if run.coupling == 0.0 {
        0.0
    } else {
        let u_f = norms.series(qf).ok_or_else(|| missing(qf))?;
        let f_series: Vec<f64> = u_f.iter().map(|v| run.coupling.abs() * v.powf(g)).collect();
        norms.time_norm(&f_series, dual(dual_pair.0))
    };
    let denominator = run.initial_l2() + forcing;
    if denominator == 0.0 {
        return Ok(StrichartzQuotient {
            value: 0.0,
            numerator,
            denominator,
            degenerate: true,
        });
    }
    Ok(StrichartzQuotient {
        value: numerator / denominator,
        numerator,
        denominator,
        degenerate: false,
    })
}

/// `‖u‖_{Y_γ}/‖f‖₂` (0 for zero data).
pub fn ygamma_quotient(run: &NlsRun) -> f64 {
    let f = run.initial_l2();
    if f == 0.0 {
        0.0
    } else {
        run.ygamma.total / f
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TtStarNorms {
    /// `∫_{|u|≥1} |u|^{−3/2} du`.
    pub k1: f64,
    /// `∫_{|u|≤1} |u|^{−β} du`, `β = n(1/2 − 1/q)`; `None` when divergent.
    pub k2: Option<f64>,
    pub beta: f64,
}

/// `L¹` norms of the two pieces of the `TT*` time kernel.
pub fn ttstar_kernel_norms(n: u32, q: f64) -> Result<TtStarNorms> {
    if !(q > 2.0) || n == 0 {
        return domain(format!("TT* kernels need q > 2 and n >= 1, got q = {q}, n = {n}"));
    }
    let gl = GaussLegendre::new(32);
    // u = w^{−2} maps [1, ∞) onto (0, 1] with |u|^{−3/2} du = 2 dw.
    let k1 = 2.0 * gl.integrate(0.0, 1.0, |w: f64| 2.0 * w.powi(3) * w.powi(-3));
    let nf = n as f64;
    let beta = if q.is_infinite() { nf / 2.0 } else { nf * (0.5 - 1.0 / q) };
    // β < 1 ⟺ n(q − 2) < 2q, compared without forming 1/q.
    let integrable = if q.is_infinite() { nf < 2.0 } else { nf * (q - 2.0) < 2.0 * q };
    let k2 = integrable.then(|| {
        // u = w^{1/(1−β)} removes the endpoint singularity.
        let e = 1.0 / (1.0 - beta);
        2.0 * gl.integrate(0.0, 1.0, |w: f64| {
            let u = w.powf(e);
            let jac = e * w.powf(e - 1.0);
            if u == 0.0 {
                e
            } else {
                u.powf(-beta) * jac
            }
        })
    });
    Ok(TtStarNorms { k1, k2, beta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_examples() {
        assert!(is_admissible(3, 2.0, 3.0));
        assert!(is_admissible(3, f64::INFINITY, 2.0));
        assert!(!is_admissible(3, 10.0, 10.0));
        assert!(!is_admissible(3, f64::INFINITY, 3.0));
        assert!(!is_admissible(3, 1.5, 3.0));
        // Boundary 2/p + 3/q = 3/2.
        assert!(is_admissible(3, 2.0, 6.0));
    }

    #[test]
    fn pairs_parse() {
        let (a, b) = parse_pairs("2,6; inf,2").unwrap();
        assert_eq!(a, (2.0, 6.0));
        assert_eq!(b, (f64::INFINITY, 2.0));
        assert!(parse_pairs("2,6").is_err());
        assert!(parse_pairs("2,x;3,3").is_err());
    }

    #[test]
    fn ttstar_closed_forms() {
        let k = ttstar_kernel_norms(3, 4.0).unwrap();
        assert!((k.k1 - 4.0).abs() < 1e-12);
        assert!((k.k2.unwrap() - 8.0).abs() < 1e-10);
        assert!(ttstar_kernel_norms(3, f64::INFINITY).unwrap().k2.is_none());
        assert!(ttstar_kernel_norms(3, 6.0).unwrap().k2.is_none());
        assert!(ttstar_kernel_norms(2, 1e9).unwrap().k2.is_some());
        assert!(ttstar_kernel_norms(3, 2.0).is_err());
    }
}
