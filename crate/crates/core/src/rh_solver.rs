//! Solution of the Riemann–Hilbert problem `Re[A f] = γ + h`.
//!
//! The imaginary boundary part `μ = Im[A f]` solves the integral equation
//! `(I − N)μ = −Mγ`; the piecewise constant `h` follows from
//! `h = [Mμ − (I − N)γ]/2`, and `A f = γ + h + iμ` gives the boundary values
//! of `f`. Interior values are recovered by a Cauchy integral of the
//! boundary data.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryScalar, PiecewiseConstant, PointLocation};
use crate::kernels::{DiscretizationContext, DiscreteOperators};

/// Maximum 1-norm condition estimate accepted before the solve is refused.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Interior points closer to the boundary than this many node spacings get
/// their Cauchy-evaluated values flagged.
pub const NEAR_BOUNDARY_FLAG_FACTOR: f64 = 5.0;

/// Right-hand-side data `γ` of the boundary condition for the Ahlfors map:
///
/// ```text
/// γ(t) = −ln|η(t)−a| − Σ_j ln|η(t)−a_j| + Σ_j ln|η(t)−z_j|
/// ```
///
/// with candidate zeros `a_j` strictly inside the region and auxiliary
/// points `z_j` inside the holes. Both lists are empty for simply connected
/// regions.
pub fn build_gamma(
    ctx: &DiscretizationContext,
    zeros: &[Complex64],
    aux: &[Complex64],
) -> Result<BoundaryScalar> {
    let b = ctx.boundary();
    let holes = b.connectivity() - 1;
    if zeros.len() != holes {
        return Err(Error::LengthMismatch {
            expected: holes,
            got: zeros.len(),
        });
    }
    if aux.len() != holes {
        return Err(Error::LengthMismatch {
            expected: holes,
            got: aux.len(),
        });
    }
    for &aj in zeros {
        match b.point_in_region(aj) {
            PointLocation::Inside => {}
            PointLocation::Outside => return Err(Error::PointOutside(aj)),
            PointLocation::NearBoundary => return Err(Error::PointNearBoundary(aj)),
        }
    }
    for (j, &zj) in aux.iter().enumerate() {
        let inside_hole = !b.near_boundary(zj, 1.0)
            && (b.component_winding(j, zj) + 1.0).abs() < 0.1;
        if !inside_hole {
            return Err(Error::InvalidInput(format!(
                "auxiliary point {zj} must lie strictly inside hole {}",
                j + 1
            )));
        }
    }

    let a = ctx.base_point();
    let gamma = b
        .eta()
        .iter()
        .map(|&e| {
            let mut g = -(e - a).norm().ln();
            for &aj in zeros {
                g -= (e - aj).norm().ln();
            }
            for &zj in aux {
                g += (e - zj).norm().ln();
            }
            g
        })
        .collect();
    Ok(gamma)
}

/// LU factorization of `I − N` with a 1-norm condition estimate, reusable
/// across right-hand sides.
pub struct RhSystem {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl RhSystem {
    /// Factors the system matrix; refuses condition estimates above
    /// [`CONDITION_LIMIT`], which signal an invalid geometry or base point.
    pub fn factor(ops: &DiscreteOperators) -> Result<Self> {
        let a = ops.system_matrix();
        let norm_a = one_norm(&a);
        let lu_t = nalgebra::LU::new(a.transpose());
        let lu = nalgebra::LU::new(a);
        let inv_norm = estimate_inverse_one_norm(&lu, &lu_t, ops.size())
            .ok_or(Error::IllConditioned(f64::INFINITY))?;
        let condition = norm_a * inv_norm;
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::IllConditioned(condition));
        }
        Ok(Self { lu, condition })
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub(crate) fn solve_vec(&self, rhs: DVector<f64>) -> Result<DVector<f64>> {
        self.lu
            .solve(&rhs)
            .ok_or(Error::IllConditioned(f64::INFINITY))
    }
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum())
        .fold(0.0, f64::max)
}

/// Hager-style estimate of `‖A⁻¹‖₁` from factorizations of `A` and `Aᵀ`.
fn estimate_inverse_one_norm(
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lu_t: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
) -> Option<f64> {
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = lu.solve(&x)?;
        estimate = y.iter().map(|v| v.abs()).sum();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = lu_t.solve(&xi)?;
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.abs()))
            .fold((0, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[jmax] = 1.0;
    }
    Some(estimate)
}

/// Solution of the discrete integral equation together with the max-norm
/// residual `‖(I−N)μ + Mγ‖_∞`.
#[derive(Debug, Clone)]
pub struct MuSolution {
    pub mu: BoundaryScalar,
    pub residual: f64,
}

/// Solves `(I − N)μ = −Mγ` with a shared factorization.
pub fn solve_mu_with(
    system: &RhSystem,
    ops: &DiscreteOperators,
    gamma: &[f64],
) -> Result<MuSolution> {
    let rhs = DVector::from_vec(ops.apply_m(gamma)?).map(|v| -v);
    let mu = system.solve_vec(rhs.clone())?;
    let lhs = &mu - ops.neumann_matrix() * &mu;
    let residual = (lhs - rhs).amax();
    Ok(MuSolution {
        mu: mu.data.into(),
        residual,
    })
}

/// Convenience form of [`solve_mu_with`] that factors on the fly.
pub fn solve_mu(ops: &DiscreteOperators, gamma: &[f64]) -> Result<MuSolution> {
    let system = RhSystem::factor(ops)?;
    solve_mu_with(&system, ops, gamma)
}

/// Recovers the piecewise constant `h = [Mμ − (I−N)γ]/2`.
///
/// Returns the per-component averages plus two diagnostics: `h_dispersion`
/// (spread of the averages across components, zero in the continuum exactly
/// when the candidate zeros are the true zeros of the map) and
/// `h_raw_deviation` (largest pointwise departure from the component
/// average, a pure discretization error).
pub fn compute_h(
    ops: &DiscreteOperators,
    gamma: &[f64],
    mu: &[f64],
) -> Result<(PiecewiseConstant, f64, f64)> {
    let m_mu = ops.apply_m(mu)?;
    if gamma.len() != ops.size() {
        return Err(Error::LengthMismatch {
            expected: ops.size(),
            got: gamma.len(),
        });
    }
    let g = DVector::from_column_slice(gamma);
    let n_gamma = ops.neumann_matrix() * &g;
    let pointwise: Vec<f64> = (0..ops.size())
        .map(|k| 0.5 * (m_mu[k] - (gamma[k] - n_gamma[k])))
        .collect();

    let n = ops.nodes_per_curve();
    let mut averages = Vec::with_capacity(ops.connectivity());
    let mut raw_deviation: f64 = 0.0;
    for p in 0..ops.connectivity() {
        let block = &pointwise[p * n..(p + 1) * n];
        let avg = block.iter().sum::<f64>() / n as f64;
        averages.push(avg);
        for v in block {
            raw_deviation = raw_deviation.max((v - avg).abs());
        }
    }
    let h = PiecewiseConstant::new(averages);
    let dispersion = h.dispersion();
    Ok((h, dispersion, raw_deviation))
}

/// Boundary values `f(η(t)) = (γ + h + iμ)/A` of the auxiliary function.
pub fn boundary_f(
    ctx: &DiscretizationContext,
    gamma: &[f64],
    h: &PiecewiseConstant,
    mu: &[f64],
) -> Vec<Complex64> {
    let b = ctx.boundary();
    (0..b.len())
        .map(|k| {
            let hk = h.value(b.component_of(k));
            Complex64::new(gamma[k] + hk, mu[k]) / ctx.coeff()[k]
        })
        .collect()
}

/// Everything recovered from one solve of the integral equation.
#[derive(Debug, Clone)]
pub struct RhSolution {
    pub mu: BoundaryScalar,
    pub h: PiecewiseConstant,
    pub h_dispersion: f64,
    pub h_raw_deviation: f64,
    pub f_boundary: Vec<Complex64>,
    pub residual: f64,
}

/// Full pipeline `γ → μ → h → f` with a shared factorization.
pub fn solve_rh_with(
    system: &RhSystem,
    ops: &DiscreteOperators,
    ctx: &DiscretizationContext,
    gamma: &[f64],
) -> Result<RhSolution> {
    let MuSolution { mu, residual } = solve_mu_with(system, ops, gamma)?;
    let (h, h_dispersion, h_raw_deviation) = compute_h(ops, gamma, &mu)?;
    let f_boundary = boundary_f(ctx, gamma, &h, &mu);
    Ok(RhSolution {
        mu,
        h,
        h_dispersion,
        h_raw_deviation,
        f_boundary,
        residual,
    })
}

/// Full pipeline that factors the system on the fly.
pub fn solve_rh(
    ops: &DiscreteOperators,
    ctx: &DiscretizationContext,
    gamma: &[f64],
) -> Result<RhSolution> {
    let system = RhSystem::factor(ops)?;
    solve_rh_with(&system, ops, ctx, gamma)
}

/// Which discrete Cauchy integral to use for interior evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CauchyKind {
    /// Ratio-normalized form, exact for constants and accurate near Γ.
    #[default]
    Ratio,
    /// Plain trapezoidal discretization of the Cauchy integral.
    Plain,
}

/// An interior value together with a flag raised when the point is close
/// enough to the boundary that plain quadrature would degrade.
#[derive(Debug, Clone, Copy)]
pub struct InteriorValue {
    pub value: Complex64,
    pub near_boundary: bool,
}

/// Evaluates boundary data at an interior point by the Cauchy integral.
pub fn cauchy_eval_with(
    ctx: &DiscretizationContext,
    f_boundary: &[Complex64],
    z: Complex64,
    kind: CauchyKind,
) -> Result<InteriorValue> {
    let b = ctx.boundary();
    if f_boundary.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: b.len(),
            got: f_boundary.len(),
        });
    }
    match b.point_in_region(z) {
        PointLocation::Inside => {}
        PointLocation::Outside => return Err(Error::PointOutside(z)),
        PointLocation::NearBoundary => return Err(Error::PointNearBoundary(z)),
    }
    let near = b.near_boundary(z, NEAR_BOUNDARY_FLAG_FACTOR);

    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for k in 0..b.len() {
        let weight = b.deta()[k] / (b.eta()[k] - z);
        num += f_boundary[k] * weight;
        den += weight;
    }
    let value = match kind {
        CauchyKind::Ratio => num / den,
        CauchyKind::Plain => num / (Complex64::i() * b.nodes_per_curve() as f64),
    };
    Ok(InteriorValue {
        value,
        near_boundary: near,
    })
}

/// [`cauchy_eval_with`] using the default ratio form.
pub fn cauchy_eval(
    ctx: &DiscretizationContext,
    f_boundary: &[Complex64],
    z: Complex64,
) -> Result<InteriorValue> {
    cauchy_eval_with(ctx, f_boundary, z, CauchyKind::Ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize, CurveSpec};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk_ctx(n: usize, a: Complex64) -> DiscretizationContext {
        let b = discretize(&[CurveSpec::circle(c(0.0, 0.0), 1.0).unwrap()], n).unwrap();
        DiscretizationContext::new(b, a).unwrap()
    }

    fn annulus_ctx(n: usize, a: Complex64) -> DiscretizationContext {
        let specs = vec![
            CurveSpec::circle(c(0.0, 0.0), 0.1).unwrap(),
            CurveSpec::circle(c(0.0, 0.0), 1.0).unwrap(),
        ];
        DiscretizationContext::new(discretize(&specs, n).unwrap(), a).unwrap()
    }

    /// Closed form of `f` for the unit disk with base point `a`: the map is
    /// the Möbius transform `(z−a)/(1−āz)`, so
    /// `f(z) = −ln(c(1−āz))/(z−a)` with `c = 1/(1−|a|²)`.
    fn disk_f_oracle(a: Complex64, z: Complex64) -> Complex64 {
        let cval = 1.0 / (1.0 - a.norm_sqr());
        if (z - a).norm() < 1e-12 {
            return a.conj() / (1.0 - a.norm_sqr());
        }
        -(cval * (1.0 - a.conj() * z)).ln() / (z - a)
    }

    #[test]
    fn disk_with_centered_base_point_is_trivial() {
        let ctx = disk_ctx(16, c(0.0, 0.0));
        let ops = DiscreteOperators::assemble(&ctx);
        let gamma = build_gamma(&ctx, &[], &[]).unwrap();
        assert!(gamma.iter().all(|g| g.abs() <= 1e-14));
        let sol = solve_rh(&ops, &ctx, &gamma).unwrap();
        assert!(sol.mu.iter().all(|v| v.abs() <= 1e-13));
        assert!(sol.h.value(0).abs() <= 1e-13);
        assert!(sol.h_dispersion <= 1e-13);
        assert!(sol.h_raw_deviation <= 1e-13);
        assert!(sol.f_boundary.iter().all(|f| f.norm() <= 1e-13));
    }

    #[test]
    fn disk_gamma_matches_formula() {
        let a = c(0.5, 0.0);
        let ctx = disk_ctx(32, a);
        let gamma = build_gamma(&ctx, &[], &[]).unwrap();
        for (k, g) in gamma.iter().enumerate() {
            let expected = -(ctx.boundary().eta()[k] - a).norm().ln();
            assert!((g - expected).abs() <= 1e-14);
        }
    }

    #[test]
    fn annulus_gamma_matches_formula() {
        let a = c(1.0 / 10.0f64.sqrt(), 0.0);
        let a1 = -a;
        let z1 = c(0.0, 0.0);
        let ctx = annulus_ctx(64, a);
        let gamma = build_gamma(&ctx, &[a1], &[z1]).unwrap();
        for (k, g) in gamma.iter().enumerate() {
            let e = ctx.boundary().eta()[k];
            let expected = -(e - a).norm().ln() - (e - a1).norm().ln() + e.norm().ln();
            assert!((g - expected).abs() <= 1e-13);
        }
    }

    #[test]
    fn gamma_validates_its_points() {
        let ctx = annulus_ctx(64, c(0.5, 0.0));
        // Candidate zero inside the hole.
        assert!(build_gamma(&ctx, &[c(0.05, 0.0)], &[c(0.0, 0.0)]).is_err());
        // Candidate zero hugging the boundary.
        assert!(matches!(
            build_gamma(&ctx, &[c(0.9999, 0.0)], &[c(0.0, 0.0)]),
            Err(Error::PointNearBoundary(_))
        ));
        // Auxiliary point not in its hole.
        assert!(matches!(
            build_gamma(&ctx, &[c(-0.2, 0.0)], &[c(0.5, 0.5)]),
            Err(Error::InvalidInput(_))
        ));
        // Wrong list lengths.
        assert!(matches!(
            build_gamma(&ctx, &[], &[]),
            Err(Error::LengthMismatch { expected: 1, got: 0 })
        ));
    }

    #[test]
    fn disk_solution_matches_mobius_oracle() {
        let a = c(0.5, 0.0);
        let ctx = disk_ctx(64, a);
        let ops = DiscreteOperators::assemble(&ctx);
        let gamma = build_gamma(&ctx, &[], &[]).unwrap();
        let sol = solve_rh(&ops, &ctx, &gamma).unwrap();

        assert!(sol.residual <= 1e-12);
        let ln_c = (4.0f64 / 3.0).ln();
        assert!((sol.h.value(0) + ln_c).abs() <= 1e-10, "h = {}", sol.h.value(0));

        for (k, f) in sol.f_boundary.iter().enumerate() {
            let oracle = disk_f_oracle(a, ctx.boundary().eta()[k]);
            assert!((f - oracle).norm() <= 1e-9, "node {k}");
        }

        let f0 = cauchy_eval(&ctx, &sol.f_boundary, c(0.0, 0.0)).unwrap();
        assert!((f0.value - 2.0 * ln_c).norm() <= 1e-10);

        // The quadrature is regular at z = a; the oracle value there is the
        // removable-singularity limit ā/(1−|a|²).
        let fa = cauchy_eval(&ctx, &sol.f_boundary, a).unwrap();
        assert!((fa.value - c(2.0 / 3.0, 0.0)).norm() <= 1e-9);
    }

    #[test]
    fn reconstruction_identity_holds() {
        let a = c(0.3, 0.2);
        let ctx = annulus_ctx(32, a);
        let ops = DiscreteOperators::assemble(&ctx);
        let gamma = build_gamma(&ctx, &[c(-0.4, 0.1)], &[c(0.0, 0.0)]).unwrap();
        let sol = solve_rh(&ops, &ctx, &gamma).unwrap();
        let b = ctx.boundary();
        for k in 0..b.len() {
            let reconstructed = ctx.coeff()[k] * sol.f_boundary[k]
                - Complex64::new(0.0, sol.mu[k])
                - Complex64::new(gamma[k], 0.0);
            let hk = sol.h.value(b.component_of(k));
            assert!((reconstructed - Complex64::new(hk, 0.0)).norm() <= 1e-13);
        }
    }

    #[test]
    fn disk_boundary_f_converges_spectrally() {
        let a = c(0.5, 0.0);
        let mut previous = f64::INFINITY;
        for n in [16usize, 32, 64] {
            let ctx = disk_ctx(n, a);
            let ops = DiscreteOperators::assemble(&ctx);
            let gamma = build_gamma(&ctx, &[], &[]).unwrap();
            let sol = solve_rh(&ops, &ctx, &gamma).unwrap();
            let err = sol
                .f_boundary
                .iter()
                .enumerate()
                .map(|(k, f)| (f - disk_f_oracle(a, ctx.boundary().eta()[k])).norm())
                .fold(0.0, f64::max);
            assert!(err < previous, "error did not decrease at n = {n}");
            previous = err;
            if n == 64 {
                assert!(err <= 1e-9);
            }
        }
    }

    #[test]
    fn h_raw_deviation_shrinks_with_refinement() {
        // Base point close enough to the hole that truncation error stays
        // above the rounding floor through n = 128.
        let a = c(0.75, 0.0);
        let a1 = c(-0.1 / 0.75, 0.0);
        let mut previous = f64::INFINITY;
        for n in [32usize, 64, 128] {
            let ctx = annulus_ctx(n, a);
            let ops = DiscreteOperators::assemble(&ctx);
            let gamma = build_gamma(&ctx, &[a1], &[c(0.0, 0.0)]).unwrap();
            let sol = solve_rh(&ops, &ctx, &gamma).unwrap();
            if previous.is_finite() {
                assert!(
                    sol.h_raw_deviation <= 0.25 * previous,
                    "n = {n}: {} vs {previous}",
                    sol.h_raw_deviation
                );
            }
            previous = sol.h_raw_deviation;
        }
    }

    #[test]
    fn solve_reports_conditioning() {
        let ctx = annulus_ctx(32, c(0.5, 0.0));
        let ops = DiscreteOperators::assemble(&ctx);
        let system = RhSystem::factor(&ops).unwrap();
        let cond = system.condition_estimate();
        assert!(cond.is_finite() && cond > 1.0 && cond < 1e6, "cond = {cond}");
    }

    #[test]
    fn cauchy_rejects_exterior_points() {
        let ctx = disk_ctx(32, c(0.0, 0.0));
        let f = vec![Complex64::new(1.0, 0.0); 32];
        assert!(matches!(
            cauchy_eval(&ctx, &f, c(2.0, 0.0)),
            Err(Error::PointOutside(_))
        ));
        assert!(matches!(
            cauchy_eval(&ctx, &f, c(0.999, 0.0)),
            Err(Error::PointNearBoundary(_))
        ));
    }

    #[test]
    fn cauchy_flags_near_boundary_points() {
        let ctx = disk_ctx(64, c(0.0, 0.0));
        let f = vec![Complex64::new(1.0, 0.0); 64];
        let deep = cauchy_eval(&ctx, &f, c(0.2, 0.0)).unwrap();
        assert!(!deep.near_boundary);
        let shallow = cauchy_eval(&ctx, &f, c(0.8, 0.0)).unwrap();
        assert!(shallow.near_boundary);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cauchy_ratio_form_is_exact_for_constants(
            re in -0.6f64..0.6,
            im in -0.6f64..0.6,
            c_re in -3.0f64..3.0,
            c_im in -3.0f64..3.0,
        ) {
            let ctx = disk_ctx(32, c(0.0, 0.0));
            let value = c(c_re, c_im);
            let f = vec![value; 32];
            let z = c(re, im);
            let got = cauchy_eval(&ctx, &f, z).unwrap();
            prop_assert!((got.value - value).norm() <= 1e-12);
        }
    }
}
