//! The generalized Neumann kernel `N`, the singular companion kernel `M`,
//! and their Nyström discretization.
//!
//! With `A(t) = η(t) − a` the kernels are
//!
//! ```text
//! N(s,t) = (1/π)·Im[ A(s)/A(t) · η̇(t)/(η(t)−η(s)) ]
//! M(s,t) = (1/π)·Re[ A(s)/A(t) · η̇(t)/(η(t)−η(s)) ]
//! ```
//!
//! `N` is continuous: expanding the bracket near `s = t` gives
//! `1/(t−s) + η̈/(2η̇) − η̇/A + O(t−s)`, whose real singular part drops out of
//! the imaginary part and leaves the diagonal limits used below. `M` keeps a
//! cotangent singularity on the same component; it is split as
//! `M(s,t) = −(1/2π)·cot((s−t)/2) + M₁(s,t)` with `M₁` smooth, so that the
//! trapezoidal rule handles `M₁` and the odd-offset conjugation rule handles
//! the cotangent part exactly on low-degree trigonometric polynomials.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryScalar, ParametrizedBoundary, PointLocation};

/// A boundary together with the base point `a` and the samples of the
/// coefficient function `A(t) = η(t) − a`.
#[derive(Debug, Clone)]
pub struct DiscretizationContext {
    boundary: ParametrizedBoundary,
    base: Complex64,
    coeff: Vec<Complex64>,
}

impl DiscretizationContext {
    /// Requires `a` strictly inside the region.
    pub fn new(boundary: ParametrizedBoundary, a: Complex64) -> Result<Self> {
        match boundary.point_in_region(a) {
            PointLocation::Inside => {}
            PointLocation::Outside => return Err(Error::PointOutside(a)),
            PointLocation::NearBoundary => return Err(Error::PointNearBoundary(a)),
        }
        let coeff = boundary.eta().iter().map(|e| e - a).collect();
        Ok(Self {
            boundary,
            base: a,
            coeff,
        })
    }

    pub fn boundary(&self) -> &ParametrizedBoundary {
        &self.boundary
    }

    pub fn base_point(&self) -> Complex64 {
        self.base
    }

    /// Samples of `A(t) = η(t) − a`.
    pub fn coeff(&self) -> &[Complex64] {
        &self.coeff
    }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// The continuous kernel `N` at node pair `(s, t)`, with the diagonal taken
/// as the limit `(1/π)·Im[η̈/(2η̇) − η̇/A]`.
pub fn neumann_kernel(ctx: &DiscretizationContext, s: usize, t: usize) -> f64 {
    let b = ctx.boundary();
    if s == t {
        let d = b.deta()[t];
        let dd = b.ddeta()[t];
        (dd / (2.0 * d) - d / ctx.coeff[t]).im / PI
    } else {
        (ctx.coeff[s] / ctx.coeff[t] * b.deta()[t] / (b.eta()[t] - b.eta()[s])).im / PI
    }
}

/// The smooth remainder `M₁(s,t) = M(s,t) + (1/2π)·cot((s−t)/2)` for node
/// pairs on the same component; diagonal limit `(1/π)·Re[η̈/(2η̇) − η̇/A]`.
pub fn m1_kernel(ctx: &DiscretizationContext, s: usize, t: usize) -> f64 {
    let b = ctx.boundary();
    assert_eq!(
        b.component_of(s),
        b.component_of(t),
        "m1_kernel is defined on same-component node pairs only"
    );
    if s == t {
        let d = b.deta()[t];
        let dd = b.ddeta()[t];
        (dd / (2.0 * d) - d / ctx.coeff[t]).re / PI
    } else {
        let m_full =
            (ctx.coeff[s] / ctx.coeff[t] * b.deta()[t] / (b.eta()[t] - b.eta()[s])).re / PI;
        m_full + cot((b.node_t(s) - b.node_t(t)) / 2.0) / TAU
    }
}

/// Full kernel `M` across distinct components, where it is smooth.
pub(crate) fn m_kernel_cross(ctx: &DiscretizationContext, s: usize, t: usize) -> f64 {
    let b = ctx.boundary();
    debug_assert_ne!(b.component_of(s), b.component_of(t));
    (ctx.coeff[s] / ctx.coeff[t] * b.deta()[t] / (b.eta()[t] - b.eta()[s])).re / PI
}

/// Odd-offset quadrature for the conjugation operator
/// `(Kμ)(s) = (1/2π) p.v.∫ μ(t)·cot((s−t)/2) dt` on one component:
///
/// ```text
/// (Kμ)(s_i) ≈ (1/n)·Σ_j [1−(−1)^{i−j}]·cot((s_i−t_j)/2)·μ(t_j)
/// ```
///
/// Exact on trigonometric polynomials of degree below `n/2`, reproducing
/// `K[cos k·] = sin(k·)`, `K[sin k·] = −cos(k·)`, `K[1] = 0`.
pub fn conjugation_quadrature(samples: &[f64], i: usize) -> Result<f64> {
    if samples.len() % 2 != 0 {
        return Err(Error::InvalidNodeCount(samples.len()));
    }
    if i >= samples.len() {
        return Err(Error::InvalidInput(format!(
            "node index {i} out of range for {} samples",
            samples.len()
        )));
    }
    Ok(conjugation_unchecked(samples, i))
}

fn conjugation_unchecked(samples: &[f64], i: usize) -> f64 {
    let n = samples.len();
    let mut acc = 0.0;
    // Only offsets of odd parity contribute; this also skips j = i.
    let start = (i + 1) % 2;
    for j in (start..n).step_by(2) {
        let arg = PI * (i as f64 - j as f64) / n as f64;
        acc += cot(arg) * samples[j];
    }
    2.0 * acc / n as f64
}

/// Spectral differentiation of one component's periodic samples, exact for
/// trigonometric polynomials of degree below `n/2` (n even).
pub(crate) fn trig_derivative(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    debug_assert_eq!(n % 2, 0);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            if i == j {
                continue;
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += 0.5 * sign * cot(PI * (i as f64 - j as f64) / n as f64) * v;
        }
        out[i] = acc;
    }
    out
}

/// Dense Nyström discretization of the operators built from `N` and `M`.
///
/// `neumann` holds `w·N(s_i,t_j)` with `w = 2π/n`. `m1` holds `w·M₁` on
/// same-component blocks and `w·M` on cross-component blocks, so that
/// applying `M` is a dense product plus the conjugation correction.
#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    m: usize,
    n: usize,
    neumann: DMatrix<f64>,
    m1: DMatrix<f64>,
}

impl DiscreteOperators {
    pub fn assemble(ctx: &DiscretizationContext) -> Self {
        let b = ctx.boundary();
        let (m, n) = (b.connectivity(), b.nodes_per_curve());
        let size = m * n;
        let w = TAU / n as f64;
        let mut neumann = DMatrix::zeros(size, size);
        let mut m1 = DMatrix::zeros(size, size);
        for s in 0..size {
            for t in 0..size {
                neumann[(s, t)] = w * neumann_kernel(ctx, s, t);
                m1[(s, t)] = if b.component_of(s) == b.component_of(t) {
                    w * m1_kernel(ctx, s, t)
                } else {
                    w * m_kernel_cross(ctx, s, t)
                };
            }
        }
        Self { m, n, neumann, m1 }
    }

    pub fn connectivity(&self) -> usize {
        self.m
    }

    pub fn nodes_per_curve(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.m * self.n
    }

    /// The weighted Neumann matrix `w·N(s_i,t_j)`.
    pub fn neumann_matrix(&self) -> &DMatrix<f64> {
        &self.neumann
    }

    /// The weighted smooth part of `M` (same component: `w·M₁`, cross: `w·M`).
    pub fn m1_matrix(&self) -> &DMatrix<f64> {
        &self.m1
    }

    /// The Nyström system matrix `I − w·N`.
    pub fn system_matrix(&self) -> DMatrix<f64> {
        let mut a = -self.neumann.clone();
        for i in 0..self.size() {
            a[(i, i)] += 1.0;
        }
        a
    }

    /// Applies the discretized singular operator `M` to node samples:
    /// smooth part by the trapezoidal rule, cotangent part by the odd-offset
    /// conjugation rule restricted to each component.
    pub fn apply_m(&self, x: &[f64]) -> Result<BoundaryScalar> {
        if x.len() != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                got: x.len(),
            });
        }
        let xv = DVector::from_column_slice(x);
        let mut y = &self.m1 * xv;
        for p in 0..self.m {
            let block = &x[p * self.n..(p + 1) * self.n];
            for i in 0..self.n {
                y[p * self.n + i] -= conjugation_unchecked(block, i);
            }
        }
        Ok(y.data.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize, CurveSpec};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_circle_ctx(n: usize) -> DiscretizationContext {
        let b = discretize(&[CurveSpec::circle(c(0.0, 0.0), 1.0).unwrap()], n).unwrap();
        DiscretizationContext::new(b, c(0.0, 0.0)).unwrap()
    }

    fn annulus_ctx(n: usize, a: Complex64) -> DiscretizationContext {
        let specs = vec![
            CurveSpec::circle(c(0.0, 0.0), 0.1).unwrap(),
            CurveSpec::circle(c(0.0, 0.0), 1.0).unwrap(),
        ];
        DiscretizationContext::new(discretize(&specs, n).unwrap(), a).unwrap()
    }

    #[test]
    fn rejects_base_point_outside() {
        let b = discretize(&[CurveSpec::circle(c(0.0, 0.0), 1.0).unwrap()], 32).unwrap();
        assert!(matches!(
            DiscretizationContext::new(b.clone(), c(2.0, 0.0)),
            Err(Error::PointOutside(_))
        ));
        assert!(matches!(
            DiscretizationContext::new(b, c(0.999, 0.0)),
            Err(Error::PointNearBoundary(_))
        ));
    }

    #[test]
    fn unit_circle_neumann_is_constant() {
        let ctx = unit_circle_ctx(16);
        for s in 0..16 {
            for t in 0..16 {
                let v = neumann_kernel(&ctx, s, t);
                assert!(
                    (v + 1.0 / TAU).abs() <= 1e-13,
                    "N({s},{t}) = {v}, expected {}",
                    -1.0 / TAU
                );
            }
        }
    }

    #[test]
    fn unit_circle_m1_vanishes() {
        let ctx = unit_circle_ctx(16);
        for s in 0..16 {
            for t in 0..16 {
                assert!(m1_kernel(&ctx, s, t).abs() <= 1e-13);
            }
        }
    }

    // Off-node oracle: the raw kernel formulas evaluated with exact curve
    // derivatives, independent of the indexed implementation.
    fn raw_bracket(
        eta: impl Fn(f64) -> Complex64,
        deta: impl Fn(f64) -> Complex64,
        a: Complex64,
        s: f64,
        t: f64,
    ) -> Complex64 {
        (eta(s) - a) / (eta(t) - a) * deta(t) / (eta(t) - eta(s))
    }

    #[test]
    fn diagonal_limits_match_finite_offsets() {
        // Ellipse 2cos t + i sin t with a = 0.3 + 0.1i.
        let (p, q) = (2.0, 1.0);
        let eta = move |t: f64| c(p * t.cos(), q * t.sin());
        let deta = move |t: f64| c(-p * t.sin(), q * t.cos());
        let a = c(0.3, 0.1);
        let spec = CurveSpec::ellipse(c(0.0, 0.0), (p, q), 0.0).unwrap();
        let b = discretize(&[spec], 40).unwrap();
        let ctx = DiscretizationContext::new(b, a).unwrap();
        for k in (0..40).step_by(2) {
            let t = ctx.boundary().node_t(k);
            for eps in [1e-4, 1e-5] {
                let br = raw_bracket(eta, deta, a, t + eps, t);
                let n_off = br.im / PI;
                let m_off = br.re / PI + cot(((t + eps) - t) / 2.0) / TAU;
                assert!(
                    (neumann_kernel(&ctx, k, k) - n_off).abs() <= 1e-3,
                    "N diagonal at node {k}"
                );
                assert!(
                    (m1_kernel(&ctx, k, k) - m_off).abs() <= 1e-3,
                    "M1 diagonal at node {k}"
                );
            }
        }
    }

    #[test]
    fn ellipse_m1_diagonal_matches_symbolic_value() {
        // At t = 0 on the ellipse (2,1): η = 2, η̇ = i, η̈ = −2, so with a = 0
        // the diagonal is (1/π)Re[−2/(2i) − i/2] = (1/π)Re[i/2] = 0; at
        // t = π/2: η = i, η̇ = −2, η̈ = −i, giving (1/π)Re[−i/(−4) − (−2)/i]
        // = (1/π)Re[i/4 − 2i] = 0 as well (both points are axis-symmetric).
        let spec = CurveSpec::ellipse(c(0.0, 0.0), (2.0, 1.0), 0.0).unwrap();
        let b = discretize(&[spec], 32).unwrap();
        let ctx = DiscretizationContext::new(b, c(0.0, 0.0)).unwrap();
        assert!(m1_kernel(&ctx, 0, 0).abs() <= 1e-14);
        assert!(m1_kernel(&ctx, 8, 8).abs() <= 1e-14);
        // Off-axis node t = π/4 checked against the direct formula.
        let t = ctx.boundary().node_t(4);
        let eta = c(2.0 * t.cos(), t.sin());
        let deta = c(-2.0 * t.sin(), t.cos());
        let ddeta = -eta;
        let expected = (ddeta / (2.0 * deta) - deta / eta).re / PI;
        assert!((m1_kernel(&ctx, 4, 4) - expected).abs() <= 1e-14);
    }

    #[test]
    #[should_panic(expected = "same-component")]
    fn m1_kernel_rejects_cross_component_pairs() {
        let ctx = annulus_ctx(32, c(0.5, 0.0));
        let _ = m1_kernel(&ctx, 0, 40);
    }

    #[test]
    fn annulus_kernels_are_finite_everywhere() {
        let ctx = annulus_ctx(64, c(0.5, 0.0));
        for s in 0..128 {
            for t in 0..128 {
                assert!(neumann_kernel(&ctx, s, t).is_finite());
            }
        }
    }

    #[test]
    fn conjugation_annihilates_constants() {
        let samples = vec![1.0; 16];
        for i in 0..16 {
            assert!(conjugation_quadrature(&samples, i).unwrap().abs() <= 1e-14);
        }
    }

    #[test]
    fn conjugation_maps_cos_to_sin() {
        let n = 16;
        let cos_t: Vec<f64> = (0..n).map(|j| (TAU * j as f64 / n as f64).cos()).collect();
        assert!(conjugation_quadrature(&cos_t, 0).unwrap().abs() <= 1e-12);
        assert!((conjugation_quadrature(&cos_t, 4).unwrap() - 1.0).abs() <= 1e-12);
        let sin_3t: Vec<f64> = (0..n)
            .map(|j| (3.0 * TAU * j as f64 / n as f64).sin())
            .collect();
        for i in 0..n {
            let expected = -(3.0 * TAU * i as f64 / n as f64).cos();
            assert!((conjugation_quadrature(&sin_3t, i).unwrap() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn conjugation_exact_below_nyquist() {
        let n = 32;
        for k in 1..n / 2 {
            let kf = k as f64;
            let cos_k: Vec<f64> = (0..n).map(|j| (kf * TAU * j as f64 / n as f64).cos()).collect();
            let sin_k: Vec<f64> = (0..n).map(|j| (kf * TAU * j as f64 / n as f64).sin()).collect();
            for i in 0..n {
                let t = TAU * i as f64 / n as f64;
                assert!(
                    (conjugation_quadrature(&cos_k, i).unwrap() - (kf * t).sin()).abs() <= 1e-12
                );
                assert!(
                    (conjugation_quadrature(&sin_k, i).unwrap() + (kf * t).cos()).abs() <= 1e-12
                );
            }
        }
    }

    #[test]
    fn conjugation_rejects_odd_sample_counts() {
        assert!(matches!(
            conjugation_quadrature(&[1.0, 2.0, 3.0], 0),
            Err(Error::InvalidNodeCount(3))
        ));
    }

    #[test]
    fn trig_derivative_is_exact_on_low_degrees() {
        let n = 16;
        for k in 1..n / 2 {
            let kf = k as f64;
            let vals: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(0.0, kf * TAU * j as f64 / n as f64).exp())
                .collect();
            let d = trig_derivative(&vals);
            for (j, dj) in d.iter().enumerate() {
                let expected = Complex64::i() * kf * vals[j];
                assert!((dj - expected).norm() <= 1e-11, "k={k}, j={j}");
            }
        }
    }

    #[test]
    fn assemble_unit_circle_entries() {
        let ctx = unit_circle_ctx(8);
        let ops = DiscreteOperators::assemble(&ctx);
        for s in 0..8 {
            for t in 0..8 {
                assert!((ops.neumann_matrix()[(s, t)] + 1.0 / 8.0).abs() <= 1e-14);
                assert!(ops.m1_matrix()[(s, t)].abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn assemble_is_deterministic() {
        let ctx = annulus_ctx(32, c(0.5, 0.0));
        let ops1 = DiscreteOperators::assemble(&ctx);
        let ops2 = DiscreteOperators::assemble(&ctx);
        for s in 0..ops1.size() {
            for t in 0..ops1.size() {
                assert_eq!(
                    ops1.neumann_matrix()[(s, t)].to_bits(),
                    ops2.neumann_matrix()[(s, t)].to_bits()
                );
                assert_eq!(
                    ops1.m1_matrix()[(s, t)].to_bits(),
                    ops2.m1_matrix()[(s, t)].to_bits()
                );
            }
        }
    }

    #[test]
    fn apply_m_closed_forms_on_unit_circle() {
        let n = 32;
        let ctx = unit_circle_ctx(n);
        let ops = DiscreteOperators::assemble(&ctx);
        let cos_t: Vec<f64> = (0..n).map(|j| (TAU * j as f64 / n as f64).cos()).collect();
        let y = ops.apply_m(&cos_t).unwrap();
        for (i, yi) in y.iter().enumerate() {
            let expected = -(TAU * i as f64 / n as f64).sin();
            assert!((yi - expected).abs() <= 1e-12, "node {i}");
        }
        let ones = vec![1.0; n];
        assert!(ops.apply_m(&ones).unwrap().iter().all(|v| v.abs() <= 1e-13));
        let zeros = vec![0.0; n];
        assert!(ops.apply_m(&zeros).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn apply_m_rejects_wrong_length() {
        let ctx = unit_circle_ctx(8);
        let ops = DiscreteOperators::assemble(&ctx);
        assert!(matches!(
            ops.apply_m(&[0.0; 4]),
            Err(Error::LengthMismatch { expected: 8, got: 4 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn apply_m_is_linear(
            seed_x in proptest::collection::vec(-1.0f64..1.0, 32),
            seed_y in proptest::collection::vec(-1.0f64..1.0, 32),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let ctx = annulus_ctx(16, c(0.5, 0.0));
            let ops = DiscreteOperators::assemble(&ctx);
            let combo: Vec<f64> = seed_x
                .iter()
                .zip(&seed_y)
                .map(|(x, y)| alpha * x + beta * y)
                .collect();
            let lhs = ops.apply_m(&combo).unwrap();
            let mx = ops.apply_m(&seed_x).unwrap();
            let my = ops.apply_m(&seed_y).unwrap();
            for i in 0..lhs.len() {
                let rhs = alpha * mx[i] + beta * my[i];
                prop_assert!((lhs[i] - rhs).abs() <= 1e-12);
            }
        }

        #[test]
        fn conjugation_exact_on_random_trig_polynomials(
            coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7),
        ) {
            let n = 16;
            let mut samples = vec![0.0; n];
            for (i, s) in samples.iter_mut().enumerate() {
                let t = TAU * i as f64 / n as f64;
                for (k, (ca, cb)) in coeffs.iter().enumerate() {
                    let kf = (k + 1) as f64;
                    *s += ca * (kf * t).cos() + cb * (kf * t).sin();
                }
            }
            for i in 0..n {
                let t = TAU * i as f64 / n as f64;
                let mut expected = 0.0;
                for (k, (ca, cb)) in coeffs.iter().enumerate() {
                    let kf = (k + 1) as f64;
                    expected += ca * (kf * t).sin() - cb * (kf * t).cos();
                }
                let got = conjugation_quadrature(&samples, i).unwrap();
                prop_assert!((got - expected).abs() <= 1e-11);
            }
        }
    }
}
