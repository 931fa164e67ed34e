//! Assembly and evaluation of the Ahlfors map.
//!
//! With base point `a`, remaining zeros `a_j`, auxiliary points `z_j` inside
//! the holes, and the auxiliary function `f` from the boundary solve, the
//! map is the product
//!
//! ```text
//! ω(z) = c·(z−a)·Π_j (a−z_j)/(a−a_j) · Π_j (z−a_j)/(z−z_j) · e^{(z−a)f(z)}
//! ```
//!
//! normalized by `ω(a) = 0`, `ω′(a) = c > 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ParametrizedBoundary, PiecewiseConstant, PointLocation};
use crate::kernels::{trig_derivative, DiscretizationContext, DiscreteOperators};
use crate::rh_solver::{
    build_gamma, cauchy_eval_with, solve_rh_with, CauchyKind, InteriorValue, RhSolution, RhSystem,
};

/// The normalization constant `c = ω′(a)` recovered from the component mean
/// of `h` via `h = −ln c − Σ_j ln(|a−z_j|/|a−a_j|)`.
pub fn recover_c(
    h: &PiecewiseConstant,
    a: Complex64,
    zeros: &[Complex64],
    aux: &[Complex64],
) -> f64 {
    let correction: f64 = zeros
        .iter()
        .zip(aux)
        .map(|(&aj, &zj)| ((a - zj).norm() / (a - aj).norm()).ln())
        .sum();
    (-h.mean() - correction).exp()
}

/// Quality measures recorded with every solved map.
#[derive(Debug, Clone, Copy)]
pub struct Diagnostics {
    /// `max_k ||ω(η_k)| − 1|` over all boundary nodes.
    pub boundary_modulus_error: f64,
    /// Spread of `h` across components; large values indicate wrong zeros.
    pub h_dispersion: f64,
    /// Largest pointwise departure of `h` from its component average.
    pub h_raw_deviation: f64,
    /// 1-norm condition estimate of the linear system.
    pub condition_estimate: f64,
    /// Max-norm residual of the discrete integral equation.
    pub solve_residual: f64,
}

/// A solved Ahlfors map, ready for evaluation anywhere in the region.
pub struct AhlforsSolution {
    ctx: DiscretizationContext,
    zeros: Vec<Complex64>,
    aux: Vec<Complex64>,
    rh: RhSolution,
    c: f64,
    cauchy: CauchyKind,
    /// `Π_j (a−z_j)/(a−a_j)`, fixed by the normalization at `a`.
    prefactor: Complex64,
    omega_boundary: Vec<Complex64>,
    diagnostics: Diagnostics,
}

impl AhlforsSolution {
    /// Solves the boundary problem for the given candidate zeros and builds
    /// the map. `aux` defaults to the hole centroids.
    pub fn solve(
        ctx: DiscretizationContext,
        zeros: &[Complex64],
        aux: Option<&[Complex64]>,
    ) -> Result<Self> {
        Self::solve_with(ctx, zeros, aux, CauchyKind::Ratio)
    }

    pub fn solve_with(
        ctx: DiscretizationContext,
        zeros: &[Complex64],
        aux: Option<&[Complex64]>,
        cauchy: CauchyKind,
    ) -> Result<Self> {
        let aux: Vec<Complex64> = match aux {
            Some(points) => points.to_vec(),
            None => default_aux_points(ctx.boundary()),
        };
        let ops = DiscreteOperators::assemble(&ctx);
        let system = RhSystem::factor(&ops)?;
        let gamma = build_gamma(&ctx, zeros, &aux)?;
        let rh = solve_rh_with(&system, &ops, &ctx, &gamma)?;
        let c = recover_c(&rh.h, ctx.base_point(), zeros, &aux);

        let a = ctx.base_point();
        let prefactor: Complex64 = zeros
            .iter()
            .zip(&aux)
            .map(|(&aj, &zj)| (a - zj) / (a - aj))
            .product();

        let omega_boundary: Vec<Complex64> = (0..ctx.boundary().len())
            .map(|k| {
                let e = ctx.boundary().eta()[k];
                boundary_product(e, a, c, prefactor, zeros, &aux)
                    * ((e - a) * rh.f_boundary[k]).exp()
            })
            .collect();
        let boundary_modulus_error = omega_boundary
            .iter()
            .map(|w| (w.norm() - 1.0).abs())
            .fold(0.0, f64::max);

        let diagnostics = Diagnostics {
            boundary_modulus_error,
            h_dispersion: rh.h_dispersion,
            h_raw_deviation: rh.h_raw_deviation,
            condition_estimate: system.condition_estimate(),
            solve_residual: rh.residual,
        };

        Ok(Self {
            ctx,
            zeros: zeros.to_vec(),
            aux,
            rh,
            c,
            cauchy,
            prefactor,
            omega_boundary,
            diagnostics,
        })
    }

    pub fn context(&self) -> &DiscretizationContext {
        &self.ctx
    }

    pub fn boundary(&self) -> &ParametrizedBoundary {
        self.ctx.boundary()
    }

    pub fn base_point(&self) -> Complex64 {
        self.ctx.base_point()
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn aux_points(&self) -> &[Complex64] {
        &self.aux
    }

    pub fn rh(&self) -> &RhSolution {
        &self.rh
    }

    /// The normalization `c = ω′(a)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// Evaluates `ω(z)` at an interior point. Exactly at `a` or at a
    /// candidate zero the vanishing product factor makes the value 0 without
    /// touching the Cauchy quadrature.
    pub fn eval(&self, z: Complex64) -> Result<InteriorValue> {
        if z == self.ctx.base_point() || self.zeros.contains(&z) {
            return Ok(InteriorValue {
                value: Complex64::new(0.0, 0.0),
                near_boundary: false,
            });
        }
        let f = cauchy_eval_with(&self.ctx, &self.rh.f_boundary, z, self.cauchy)?;
        let a = self.ctx.base_point();
        let value = boundary_product(z, a, self.c, self.prefactor, &self.zeros, &self.aux)
            * ((z - a) * f.value).exp();
        Ok(InteriorValue {
            value,
            near_boundary: f.near_boundary,
        })
    }

    /// `ω` at boundary node `k`, using the boundary values of `f` directly.
    pub fn boundary_value(&self, k: usize) -> Complex64 {
        self.omega_boundary[k]
    }

    /// Argument-principle count `(1/2πi)∮ ω′/ω dη ≈ m`, with `dω/dt` from
    /// spectral differentiation of the boundary samples per component.
    pub fn zero_count(&self) -> f64 {
        let b = self.ctx.boundary();
        let n = b.nodes_per_curve();
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..b.connectivity() {
            let block = &self.omega_boundary[p * n..(p + 1) * n];
            let dw = trig_derivative(block);
            for (w, d) in block.iter().zip(&dw) {
                acc += d / w;
            }
        }
        (acc / (Complex64::i() * n as f64)).re
    }

    /// `ω′(a)` by a centered difference with step `1e−5·extent`.
    pub fn derivative_at_base(&self) -> Result<Complex64> {
        let a = self.ctx.base_point();
        let step = 1e-5 * self.ctx.boundary().extent();
        let plus = self.eval(a + step)?.value;
        let minus = self.eval(a - step)?.value;
        Ok((plus - minus) / (2.0 * step))
    }

    /// Maps a family of grid curves through `ω`, clipping to the region.
    /// Points outside or too close to the boundary are dropped and counted.
    pub fn map_grid(&self, spec: &GridSpec) -> Result<MappedGrid> {
        let b = self.ctx.boundary();
        let base_curves = spec.sample(b);
        let mut original = Vec::new();
        let mut image = Vec::new();
        let mut dropped = 0usize;
        let mut id = 0usize;

        for curve in base_curves {
            let mut run: Vec<Complex64> = Vec::new();
            let flush = |run: &mut Vec<Complex64>,
                             original: &mut Vec<Polyline>,
                             image: &mut Vec<Polyline>,
                             id: &mut usize|
             -> Result<()> {
                if run.len() >= 2 {
                    let mapped: Result<Vec<Complex64>> = run
                        .iter()
                        .map(|&z| self.eval(z).map(|v| v.value))
                        .collect();
                    original.push(Polyline {
                        id: *id,
                        points: std::mem::take(run),
                    });
                    image.push(Polyline {
                        id: *id,
                        points: mapped?,
                    });
                    *id += 1;
                } else {
                    run.clear();
                }
                Ok(())
            };
            for z in curve {
                if b.point_in_region(z) == PointLocation::Inside {
                    run.push(z);
                } else {
                    dropped += 1;
                    flush(&mut run, &mut original, &mut image, &mut id)?;
                }
            }
            flush(&mut run, &mut original, &mut image, &mut id)?;
        }

        if original.is_empty() {
            return Err(Error::InvalidInput(
                "grid does not intersect the region".into(),
            ));
        }
        Ok(MappedGrid {
            original,
            image,
            dropped_points: dropped,
        })
    }
}

fn boundary_product(
    z: Complex64,
    a: Complex64,
    c: f64,
    prefactor: Complex64,
    zeros: &[Complex64],
    aux: &[Complex64],
) -> Complex64 {
    let hole_product: Complex64 = zeros
        .iter()
        .zip(aux)
        .map(|(&aj, &zj)| (z - aj) / (z - zj))
        .product();
    c * (z - a) * prefactor * hole_product
}

/// Default auxiliary points: the centroid of each hole's nodes.
pub fn default_aux_points(boundary: &ParametrizedBoundary) -> Vec<Complex64> {
    (0..boundary.connectivity() - 1)
        .map(|j| boundary.centroid(j))
        .collect()
}

/// A family of grid curves over the region, to be clipped and mapped.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `lines_x` vertical and `lines_y` horizontal lines across the bounding
    /// box, each sampled at `samples` points.
    Cartesian {
        lines_x: usize,
        lines_y: usize,
        samples: usize,
    },
    /// `circles` concentric circles and `rays` radial segments about
    /// `center`, each sampled at `samples` points.
    Polar {
        center: Complex64,
        circles: usize,
        rays: usize,
        samples: usize,
    },
}

impl GridSpec {
    fn sample(&self, b: &ParametrizedBoundary) -> Vec<Vec<Complex64>> {
        let mut curves = Vec::new();
        match *self {
            GridSpec::Cartesian {
                lines_x,
                lines_y,
                samples,
            } => {
                let (mut lo_re, mut hi_re) = (f64::INFINITY, f64::NEG_INFINITY);
                let (mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY);
                for e in b.eta() {
                    lo_re = lo_re.min(e.re);
                    hi_re = hi_re.max(e.re);
                    lo_im = lo_im.min(e.im);
                    hi_im = hi_im.max(e.im);
                }
                for i in 0..lines_x {
                    let x = lo_re + (hi_re - lo_re) * (i + 1) as f64 / (lines_x + 1) as f64;
                    curves.push(
                        (0..samples)
                            .map(|k| {
                                let y =
                                    lo_im + (hi_im - lo_im) * k as f64 / (samples - 1) as f64;
                                Complex64::new(x, y)
                            })
                            .collect(),
                    );
                }
                for i in 0..lines_y {
                    let y = lo_im + (hi_im - lo_im) * (i + 1) as f64 / (lines_y + 1) as f64;
                    curves.push(
                        (0..samples)
                            .map(|k| {
                                let x =
                                    lo_re + (hi_re - lo_re) * k as f64 / (samples - 1) as f64;
                                Complex64::new(x, y)
                            })
                            .collect(),
                    );
                }
            }
            GridSpec::Polar {
                center,
                circles,
                rays,
                samples,
            } => {
                let r_max = b
                    .eta()
                    .iter()
                    .map(|e| (e - center).norm())
                    .fold(0.0, f64::max);
                let r_min = if b.point_in_region(center) == PointLocation::Inside {
                    0.0
                } else {
                    b.eta()
                        .iter()
                        .map(|e| (e - center).norm())
                        .fold(f64::INFINITY, f64::min)
                };
                for i in 0..circles {
                    let r = r_min + (r_max - r_min) * (i + 1) as f64 / (circles + 1) as f64;
                    curves.push(
                        (0..samples)
                            .map(|k| {
                                let t = std::f64::consts::TAU * k as f64 / (samples - 1) as f64;
                                center + Complex64::from_polar(r, t)
                            })
                            .collect(),
                    );
                }
                for i in 0..rays {
                    let t = std::f64::consts::TAU * i as f64 / rays as f64;
                    curves.push(
                        (0..samples)
                            .map(|k| {
                                let r =
                                    r_min + (r_max - r_min) * k as f64 / (samples - 1) as f64;
                                center + Complex64::from_polar(r, t)
                            })
                            .collect(),
                    );
                }
            }
        }
        curves
    }
}

/// One connected piece of a clipped grid curve.
#[derive(Debug, Clone)]
pub struct Polyline {
    pub id: usize,
    pub points: Vec<Complex64>,
}

/// A clipped grid and its image under the map, polyline ids matching.
#[derive(Debug, Clone)]
pub struct MappedGrid {
    pub original: Vec<Polyline>,
    pub image: Vec<Polyline>,
    pub dropped_points: usize,
}
