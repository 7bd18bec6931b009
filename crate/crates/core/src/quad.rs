//! Quadrature building blocks: Gauss–Legendre panels, adaptive Gauss–Kronrod,
//! compensated summation and Richardson extrapolation.
//!
//! Everything here is generic over [`Scalar`], implemented for `f64` and
//! `Complex64`, so the same rules serve real densities and oscillatory
//! complex integrands.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field-like values that quadrature rules can accumulate.
pub trait Scalar:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated accumulator for complex values (componentwise).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Sum a slice with compensation; order is fixed so the result is reproducible.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: Scalar>(&self, a: f64, b: f64, f: impl Fn(f64) -> T) -> T {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, dp)
}

/// Shared 16-point rule used by the panel integrators.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Composite rule over explicit panel breakpoints, summed with compensation.
pub fn integrate_breakpoints_complex(
    rule: &GaussLegendre,
    breaks: &[f64],
    f: impl Fn(f64) -> Complex64,
) -> Complex64 {
    let mut acc = ComplexSum::new();
    for pair in breaks.windows(2) {
        for (x, w) in rule.mapped(pair[0], pair[1]) {
            acc.add(f(x) * w);
        }
    }
    acc.value()
}

pub fn integrate_breakpoints_real(rule: &GaussLegendre, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for pair in breaks.windows(2) {
        for (x, w) in rule.mapped(pair[0], pair[1]) {
            acc.add(f(x) * w);
        }
    }
    acc.value()
}

/// Composite Gauss–Legendre over `panels` equal sub-intervals of [a, b].
pub fn composite<T: Scalar>(rule: &GaussLegendre, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> T) -> T {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == panels { b } else { lo + h };
        acc = acc + rule.integrate(lo, hi, &f);
    }
    acc
}

// Kronrod 15 / Gauss 7 abscissae and weights (QUADPACK).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Scalar>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        let s = f1 + f2;
        kronrod = kronrod + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration on [a, b].
pub fn adaptive<T: Scalar>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut evals = 15;
    while total_err > abs_tol.max(rel_tol * total.magnitude()) {
        if heap.len() >= max_segments {
            return Err(Error::Numerical {
                message: format!("adaptive quadrature on [{a}, {b}] hit the segment limit"),
                residual: total_err,
            });
        }
        let seg = heap.pop().expect("heap is never empty");
        let m = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(&f, seg.a, m);
        let (v2, e2) = gk15(&f, m, seg.b);
        evals += 30;
        total = total - seg.value + v1 + v2;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: seg.b, value: v2, error: e2 });
    }
    // Re-sum from the leaves to shed the drift of the running total.
    let mut value = T::zero();
    let mut error = 0.0;
    for seg in heap.iter() {
        value = value + seg.value;
        error += seg.error;
    }
    Ok(Estimate { value, error, evaluations: evals })
}

/// Richardson tableau for a sequence computed at steps h, h/2, h/4, ...
/// assuming an error expansion in integer powers of h.
///
/// Returns the extrapolated value and the difference between the two best
/// entries as an error indicator.
pub fn richardson<T: Scalar>(values: &[T]) -> (T, f64) {
    assert!(!values.is_empty());
    let mut table: Vec<T> = values.to_vec();
    let mut best = table[table.len() - 1];
    let mut err = f64::INFINITY;
    let mut factor = 1.0;
    while table.len() > 1 {
        factor *= 2.0;
        let next: Vec<T> = table
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) * (1.0 / (factor - 1.0)))
            .collect();
        let candidate = next[next.len() - 1];
        err = (candidate - best).magnitude();
        best = candidate;
        table = next;
    }
    (best, err)
}
