//! Adaptive composite Gauss-Legendre quadrature over intervals and rectangles.
//!
//! Each cell is integrated once with the base rule and once as two (1D) or
//! four (2D) half-size children; the difference is the cell's error estimate.
//! Cells that miss their share of the tolerance are split and refined
//! recursively. The tree is folded in a fixed order, so results are
//! bit-reproducible for a given [`QuadratureSpec`].

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector3;

/// Rule order, tolerances and refinement limits for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per cell (per axis in 2D).
    pub nodes_per_cell: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections of the root cell.
    pub max_depth: usize,
    /// Singularity guard, as a fraction of the scene scale. Field and linking
    /// evaluations closer than `min_distance_guard * scale` to a source are refused.
    pub min_distance_guard: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_cell: 8,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 18,
            min_distance_guard: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_cell < 2 {
            return Err(Error::InvalidArgument(format!(
                "nodes_per_cell must be >= 2, got {}",
                self.nodes_per_cell
            )));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
        }
        if !(self.min_distance_guard >= 0.0 && self.min_distance_guard.is_finite()) {
            return Err(Error::InvalidArgument(
                "min_distance_guard must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Absolute guard distance for a scene of the given scale.
    pub fn guard(&self, scale: f64) -> f64 {
        self.min_distance_guard * scale
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }
}

/// Values that can be integrated: reals and vectors.
pub trait QuadValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    /// Norm used for error control. Vector components share one cell tree.
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Vector3 {
    fn zero() -> Self {
        Vector3::ZERO
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

impl<T: QuadValue> Estimate<T> {
    pub fn zero() -> Self {
        Self {
            value: T::zero(),
            error: 0.0,
            evaluations: 0,
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            value: self.value * s,
            error: self.error * s.abs(),
            evaluations: self.evaluations,
        }
    }
}

impl<T: QuadValue> Add for Estimate<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            error: self.error + o.error,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are roots of P_n found by Newton iteration from the Chebyshev guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
            dp = if d != 0.0 { d } else { dp };
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

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fixed rule on [a, b]; also returns the integral of the magnitude.
    fn apply<T: QuadValue>(&self, f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        let mut abs_acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            acc = acc + v * *w;
            abs_acc += v.magnitude() * w;
        }
        (acc * half, abs_acc * half.abs())
    }

    fn apply_2d<T: QuadValue>(
        &self,
        f: &impl Fn(f64, f64) -> T,
        rect: Rect,
    ) -> (T, f64) {
        let hs = 0.5 * (rect.s1 - rect.s0);
        let ms = 0.5 * (rect.s0 + rect.s1);
        let ht = 0.5 * (rect.t1 - rect.t0);
        let mt = 0.5 * (rect.t0 + rect.t1);
        let mut acc = T::zero();
        let mut abs_acc = 0.0;
        for (xs, ws) in self.nodes.iter().zip(&self.weights) {
            let s = ms + hs * xs;
            let mut row = T::zero();
            let mut abs_row = 0.0;
            for (xt, wt) in self.nodes.iter().zip(&self.weights) {
                let v = f(s, mt + ht * xt);
                row = row + v * *wt;
                abs_row += v.magnitude() * wt;
            }
            acc = acc + row * *ws;
            abs_acc += abs_row * ws;
        }
        let jac = hs * ht;
        (acc * jac, abs_acc * jac.abs())
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
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Axis-aligned parameter rectangle [s0, s1] x [t0, t1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub s0: f64,
    pub s1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Rect {
    pub fn new(s: (f64, f64), t: (f64, f64)) -> Self {
        Self {
            s0: s.0,
            s1: s.1,
            t0: t.0,
            t1: t.1,
        }
    }

    fn area(&self) -> f64 {
        (self.s1 - self.s0) * (self.t1 - self.t0)
    }

    fn quarters(&self) -> [Rect; 4] {
        let sm = 0.5 * (self.s0 + self.s1);
        let tm = 0.5 * (self.t0 + self.t1);
        [
            Rect::new((self.s0, sm), (self.t0, tm)),
            Rect::new((self.s0, sm), (tm, self.t1)),
            Rect::new((sm, self.s1), (self.t0, tm)),
            Rect::new((sm, self.s1), (tm, self.t1)),
        ]
    }
}

// Differences below this many ulps of the cell magnitude are roundoff.
const ROUNDOFF_ULPS: f64 = 64.0;

struct Tolerance {
    total: f64,
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate_1d<T, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "integration interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let rule = GaussLegendre::new(spec.nodes_per_cell);
    let (coarse, _) = rule.apply(&f, a, b);
    let tol = Tolerance {
        total: spec.abs_tol.max(spec.rel_tol * coarse.magnitude()),
    };
    let mut est = refine_1d(&rule, &f, a, b, coarse, 1.0, 0, spec, &tol)?;
    est.evaluations += rule.order();
    Ok(est)
}

#[allow(clippy::too_many_arguments)]
fn refine_1d<T: QuadValue>(
    rule: &GaussLegendre,
    f: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    coarse: T,
    fraction: f64,
    depth: usize,
    spec: &QuadratureSpec,
    tol: &Tolerance,
) -> Result<Estimate<T>> {
    let m = 0.5 * (a + b);
    let (left, left_abs) = rule.apply(f, a, m);
    let (right, right_abs) = rule.apply(f, m, b);
    let fine = left + right;
    let diff = (fine + coarse * -1.0).magnitude();
    let roundoff = ROUNDOFF_ULPS * f64::EPSILON * (left_abs + right_abs);
    let allowed = tol.total * fraction;
    if diff <= allowed || diff <= roundoff {
        return Ok(Estimate {
            value: fine,
            error: diff.max(roundoff),
            evaluations: 2 * rule.order(),
        });
    }
    if depth + 1 >= spec.max_depth {
        return Err(Error::NoConvergence {
            depth: depth + 1,
            estimate: diff,
            tolerance: allowed,
        });
    }
    let l = refine_1d(rule, f, a, m, left, 0.5 * fraction, depth + 1, spec, tol)?;
    let r = refine_1d(rule, f, m, b, right, 0.5 * fraction, depth + 1, spec, tol)?;
    let mut out = l + r;
    out.evaluations += 2 * rule.order();
    Ok(out)
}

/// Adaptive integral of `f(s, t)` over a rectangle, by quadtree refinement.
pub fn integrate_2d<T, F>(f: F, rect: Rect, spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
{
    spec.validate()?;
    if !(rect.s0 < rect.s1 && rect.t0 < rect.t1) || !rect.area().is_finite() {
        return Err(Error::InvalidArgument(format!(
            "integration rectangle must be non-empty, got {rect:?}"
        )));
    }
    let rule = GaussLegendre::new(spec.nodes_per_cell);
    let (coarse, _) = rule.apply_2d(&f, rect);
    let tol = Tolerance {
        total: spec.abs_tol.max(spec.rel_tol * coarse.magnitude()),
    };
    let mut est = refine_2d(&rule, &f, rect, coarse, 1.0, 0, spec, &tol)?;
    est.evaluations += rule.order() * rule.order();
    Ok(est)
}

#[allow(clippy::too_many_arguments)]
fn refine_2d<T: QuadValue>(
    rule: &GaussLegendre,
    f: &impl Fn(f64, f64) -> T,
    rect: Rect,
    coarse: T,
    fraction: f64,
    depth: usize,
    spec: &QuadratureSpec,
    tol: &Tolerance,
) -> Result<Estimate<T>> {
    let quarters = rect.quarters();
    let children = quarters.map(|q| rule.apply_2d(f, q));
    let fine = children
        .iter()
        .fold(T::zero(), |acc, (v, _)| acc + *v);
    let abs_sum: f64 = children.iter().map(|(_, a)| a).sum();
    let diff = (fine + coarse * -1.0).magnitude();
    let roundoff = ROUNDOFF_ULPS * f64::EPSILON * abs_sum;
    let allowed = tol.total * fraction;
    let evals = 4 * rule.order() * rule.order();
    if diff <= allowed || diff <= roundoff {
        return Ok(Estimate {
            value: fine,
            error: diff.max(roundoff),
            evaluations: evals,
        });
    }
    if depth + 1 >= spec.max_depth {
        return Err(Error::NoConvergence {
            depth: depth + 1,
            estimate: diff,
            tolerance: allowed,
        });
    }
    let mut out = Estimate::zero();
    for (q, (v, _)) in quarters.into_iter().zip(children) {
        out = out + refine_2d(rule, f, q, v, 0.25 * fraction, depth + 1, spec, tol)?;
    }
    out.evaluations += evals;
    Ok(out)
}

/// Composite rule on `cells` equal subintervals, without adaptivity.
pub fn integrate_1d_fixed<T, F>(f: F, a: f64, b: f64, cells: usize, order: usize) -> T
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let rule = GaussLegendre::new(order);
    let h = (b - a) / cells as f64;
    (0..cells).fold(T::zero(), |acc, i| {
        let lo = a + h * i as f64;
        acc + rule.apply(&f, lo, lo + h).0
    })
}

/// Tensor composite rule on a `cells x cells` grid, without adaptivity.
pub fn integrate_2d_fixed<T, F>(f: F, rect: Rect, cells: usize, order: usize) -> T
where
    T: QuadValue,
    F: Fn(f64, f64) -> T,
{
    let rule = GaussLegendre::new(order);
    let hs = (rect.s1 - rect.s0) / cells as f64;
    let ht = (rect.t1 - rect.t0) / cells as f64;
    let mut acc = T::zero();
    for i in 0..cells {
        for j in 0..cells {
            let s0 = rect.s0 + hs * i as f64;
            let t0 = rect.t0 + ht * j as f64;
            acc = acc + rule.apply_2d(&f, Rect::new((s0, s0 + hs), (t0, t0 + ht))).0;
        }
    }
    acc
}
