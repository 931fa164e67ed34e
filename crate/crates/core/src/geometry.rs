//! Boundary representation for bounded multiply connected regions.
//!
//! The boundary `Γ = Γ₁ ∪ … ∪ Γ_m` consists of `m` smooth closed Jordan
//! curves of which the last encloses all others. Every curve is sampled at
//! the same even number `n` of equidistant parameter nodes `t_i = 2πi/n` on
//! `[0, 2π)`. The region lies on the left of each curve, so the outer curve
//! runs counterclockwise and every inner curve clockwise; orientation is
//! corrected automatically during discretization.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Classification of a point relative to the region.
///
/// `NearBoundary` means the point is within one node spacing of some curve,
/// where the winding-number quadrature cannot be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLocation {
    Inside,
    Outside,
    NearBoundary,
}

/// Real scalar data sampled at all boundary nodes, component-major.
pub type BoundaryScalar = Vec<f64>;

/// Supported curve families.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Circle {
        center: Complex64,
        radius: f64,
    },
    Ellipse {
        center: Complex64,
        semi_axes: (f64, f64),
        rotation: f64,
    },
    /// Trigonometric polynomial `η(t) = Σ c_k e^{ikt}` given as `(k, c_k)`
    /// pairs; covers any smooth curve via Fourier fitting.
    Trig {
        coefficients: Vec<(i32, Complex64)>,
    },
}

/// A single boundary curve before discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    kind: CurveKind,
    reversed: bool,
}

impl CurveSpec {
    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidCurve(format!(
                "circle radius must be strictly positive, got {radius}"
            )));
        }
        Ok(Self {
            kind: CurveKind::Circle { center, radius },
            reversed: false,
        })
    }

    pub fn ellipse(center: Complex64, semi_axes: (f64, f64), rotation: f64) -> Result<Self> {
        let (p, q) = semi_axes;
        if !(p > 0.0 && q > 0.0) || !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidCurve(format!(
                "ellipse semi-axes must be strictly positive, got ({p}, {q})"
            )));
        }
        Ok(Self {
            kind: CurveKind::Ellipse {
                center,
                semi_axes,
                rotation,
            },
            reversed: false,
        })
    }

    pub fn trig(coefficients: Vec<(i32, Complex64)>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidCurve(
                "trigonometric curve needs at least one coefficient".into(),
            ));
        }
        Ok(Self {
            kind: CurveKind::Trig { coefficients },
            reversed: false,
        })
    }

    /// Marks the parametrization as running opposite to the stored formula.
    pub fn with_reversed(mut self, reversed: bool) -> Self {
        self.reversed = reversed;
        self
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Samples `(η, η̇, η̈)` at parameter `t`, honoring the direction flag.
    fn eval(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        if self.reversed {
            let (eta, deta, ddeta) = self.eval_forward(TAU - t);
            (eta, -deta, ddeta)
        } else {
            self.eval_forward(t)
        }
    }

    fn eval_forward(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        match &self.kind {
            CurveKind::Circle { center, radius } => {
                let e = Complex64::new(0.0, t).exp() * radius;
                (center + e, Complex64::i() * e, -e)
            }
            CurveKind::Ellipse {
                center,
                semi_axes: (p, q),
                rotation,
            } => {
                let rot = Complex64::new(0.0, *rotation).exp();
                let pos = Complex64::new(p * t.cos(), q * t.sin());
                let vel = Complex64::new(-p * t.sin(), q * t.cos());
                (center + rot * pos, rot * vel, -rot * pos)
            }
            CurveKind::Trig { coefficients } => {
                let mut eta = Complex64::new(0.0, 0.0);
                let mut deta = Complex64::new(0.0, 0.0);
                let mut ddeta = Complex64::new(0.0, 0.0);
                for &(k, c) in coefficients {
                    let kf = f64::from(k);
                    let basis = c * Complex64::new(0.0, kf * t).exp();
                    eta += basis;
                    deta += Complex64::i() * kf * basis;
                    ddeta -= kf * kf * basis;
                }
                (eta, deta, ddeta)
            }
        }
    }
}

/// All curves sampled at `n` nodes each, with first and second derivatives,
/// in component-major node order (node `k` lies on component `k / n`).
#[derive(Debug, Clone)]
pub struct ParametrizedBoundary {
    m: usize,
    n: usize,
    eta: Vec<Complex64>,
    deta: Vec<Complex64>,
    ddeta: Vec<Complex64>,
    /// Per-component node spacing scale `(2π/n)·max|η̇|`, the distance below
    /// which quadrature against that component degrades.
    spacing: Vec<f64>,
    extent: f64,
}

/// Samples the curves, fixes orientation so the region is on the left, and
/// verifies that the last curve encloses all others and that no two curves
/// interleave.
pub fn discretize(specs: &[CurveSpec], n: usize) -> Result<ParametrizedBoundary> {
    if specs.is_empty() {
        return Err(Error::InvalidBoundary("at least one curve is required".into()));
    }
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidNodeCount(n));
    }
    let m = specs.len();

    let mut eta = Vec::with_capacity(m * n);
    let mut deta = Vec::with_capacity(m * n);
    let mut ddeta = Vec::with_capacity(m * n);

    for (j, spec) in specs.iter().enumerate() {
        let samples = sample_curve(spec, j, n)?;
        let centroid = mean(&samples.0);
        let w = winding_of(&samples.0, &samples.1, centroid);
        let rounded = w.round();
        if (w - rounded).abs() > 0.1 || rounded.abs() != 1.0 {
            return Err(Error::InvalidBoundary(format!(
                "curve {} winds {w:.3} times about its own centroid; expected ±1",
                j + 1
            )));
        }
        let target = if j + 1 == m { 1.0 } else { -1.0 };
        let oriented = if rounded == target {
            samples
        } else {
            sample_curve(&spec.clone().with_reversed(!spec.reversed), j, n)?
        };
        eta.extend_from_slice(&oriented.0);
        deta.extend_from_slice(&oriented.1);
        ddeta.extend_from_slice(&oriented.2);
    }

    let spacing = (0..m)
        .map(|j| {
            let max_speed = deta[j * n..(j + 1) * n]
                .iter()
                .map(|d| d.norm())
                .fold(0.0, f64::max);
            TAU / n as f64 * max_speed
        })
        .collect();

    let (mut lo_re, mut hi_re) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY);
    for e in &eta {
        lo_re = lo_re.min(e.re);
        hi_re = hi_re.max(e.re);
        lo_im = lo_im.min(e.im);
        hi_im = hi_im.max(e.im);
    }
    let extent = Complex64::new(hi_re - lo_re, hi_im - lo_im).norm();

    let boundary = ParametrizedBoundary {
        m,
        n,
        eta,
        deta,
        ddeta,
        spacing,
        extent,
    };
    boundary.check_arrangement()?;
    Ok(boundary)
}

type CurveSamples = (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>);

fn sample_curve(spec: &CurveSpec, index: usize, n: usize) -> Result<CurveSamples> {
    let mut eta = Vec::with_capacity(n);
    let mut deta = Vec::with_capacity(n);
    let mut ddeta = Vec::with_capacity(n);
    for i in 0..n {
        let t = TAU * i as f64 / n as f64;
        let (e, d, dd) = spec.eval(t);
        if !(e.is_finite() && d.is_finite() && dd.is_finite()) {
            return Err(Error::InvalidCurve(format!(
                "curve {} is not finite at node {i}",
                index + 1
            )));
        }
        eta.push(e);
        deta.push(d);
        ddeta.push(dd);
    }
    let max_speed = deta.iter().map(|d| d.norm()).fold(0.0, f64::max);
    for (i, d) in deta.iter().enumerate() {
        if d.norm() <= 1e-10 * max_speed {
            return Err(Error::InvalidCurve(format!(
                "curve {} has a vanishing tangent at node {i} (t = {:.6})",
                index + 1,
                TAU * i as f64 / n as f64
            )));
        }
    }
    Ok((eta, deta, ddeta))
}

fn mean(points: &[Complex64]) -> Complex64 {
    points.iter().sum::<Complex64>() / points.len() as f64
}

/// Trapezoidal winding number of the sampled closed curve about `z`.
fn winding_of(eta: &[Complex64], deta: &[Complex64], z: Complex64) -> f64 {
    let n = eta.len() as f64;
    let sum: Complex64 = eta
        .iter()
        .zip(deta)
        .map(|(e, d)| d / (e - z))
        .sum();
    (sum / (Complex64::i() * n)).re
}

impl ParametrizedBoundary {
    /// Number of boundary curves `m`.
    pub fn connectivity(&self) -> usize {
        self.m
    }

    /// Nodes per curve `n`.
    pub fn nodes_per_curve(&self) -> usize {
        self.n
    }

    /// Total node count `m·n`.
    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eta(&self) -> &[Complex64] {
        &self.eta
    }

    pub fn deta(&self) -> &[Complex64] {
        &self.deta
    }

    pub fn ddeta(&self) -> &[Complex64] {
        &self.ddeta
    }

    pub fn component_of(&self, k: usize) -> usize {
        k / self.n
    }

    pub fn component_range(&self, j: usize) -> std::ops::Range<usize> {
        j * self.n..(j + 1) * self.n
    }

    /// Parameter value of node `k` within its interval `[0, 2π)`.
    pub fn node_t(&self, k: usize) -> f64 {
        TAU * (k % self.n) as f64 / self.n as f64
    }

    /// Mean of the nodes of component `j`.
    pub fn centroid(&self, j: usize) -> Complex64 {
        mean(&self.eta[self.component_range(j)])
    }

    /// Diagonal of the bounding box of all nodes; a length scale for steps
    /// and tolerances.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Node spacing scale `(2π/n)·max|η̇|` of component `j`.
    pub fn component_spacing(&self, j: usize) -> f64 {
        self.spacing[j]
    }

    /// Winding number of component `j` alone about `z`.
    pub fn component_winding(&self, j: usize, z: Complex64) -> f64 {
        let r = self.component_range(j);
        winding_of(&self.eta[r.clone()], &self.deta[r], z)
    }

    /// Winding number of the whole oriented boundary about `z`.
    pub fn winding_number(&self, z: Complex64) -> f64 {
        (0..self.m).map(|j| self.component_winding(j, z)).sum()
    }

    /// Distance from `z` to the nearest sampled node.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        self.eta
            .iter()
            .map(|e| (e - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// True when `z` is within `factor` node spacings of some component,
    /// each component judged by its own spacing scale.
    pub fn near_boundary(&self, z: Complex64, factor: f64) -> bool {
        (0..self.m).any(|j| {
            let r = self.component_range(j);
            let dist = self.eta[r]
                .iter()
                .map(|e| (e - z).norm())
                .fold(f64::INFINITY, f64::min);
            dist < factor * self.spacing[j]
        })
    }

    /// Classifies `z` by the discrete winding number of Γ about it.
    pub fn point_in_region(&self, z: Complex64) -> PointLocation {
        if !z.is_finite() {
            return PointLocation::Outside;
        }
        if self.near_boundary(z, 1.0) {
            return PointLocation::NearBoundary;
        }
        let w = self.winding_number(z);
        if (w - w.round()).abs() > 0.1 {
            return PointLocation::NearBoundary;
        }
        match w.round() as i64 {
            1 => PointLocation::Inside,
            0 => PointLocation::Outside,
            _ => PointLocation::NearBoundary,
        }
    }

    /// Enclosure and disjointness checks on the oriented samples.
    fn check_arrangement(&self) -> Result<()> {
        let outer = self.m - 1;
        for j in 0..outer {
            let c = self.centroid(j);
            let w = self.component_winding(outer, c);
            if (w - 1.0).abs() > 0.1 {
                return Err(Error::InvalidBoundary(format!(
                    "outer curve does not enclose curve {} (winding {w:.3})",
                    j + 1
                )));
            }
        }
        for p in 0..outer {
            for q in 0..outer {
                if p == q {
                    continue;
                }
                let w = self.component_winding(p, self.centroid(q));
                if w.abs() > 0.1 {
                    return Err(Error::InvalidBoundary(format!(
                        "curves {} and {} are not disjoint (winding {w:.3})",
                        p + 1,
                        q + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A real function constant on each boundary component.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "needs one value per component");
        Self { values }
    }

    pub fn component_count(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Largest spread `max_j |h_j − h_1|` across components.
    pub fn dispersion(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v - self.values[0]).abs())
            .fold(0.0, f64::max)
    }

    /// Expands to a node-aligned sample vector.
    pub fn lift(&self, boundary: &ParametrizedBoundary) -> BoundaryScalar {
        assert_eq!(self.values.len(), boundary.connectivity());
        let n = boundary.nodes_per_curve();
        let mut out = Vec::with_capacity(boundary.len());
        for &v in &self.values {
            out.extend(std::iter::repeat(v).take(n));
        }
        out
    }
}
