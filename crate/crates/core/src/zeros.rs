//! Location of the unknown zeros of the Ahlfors map.
//!
//! For the true zeros the recovered `h` is one constant across all boundary
//! components, so the spread `Σ_j (h_j − h_1)²` vanishes there. Uniform `h`
//! alone is not enough, though: it supplies `m−1` real conditions for the
//! `2(m−1)` real unknowns, and its null set is the whole family of
//! unit-modulus boundary maps of degree `m` (for the annulus `r < |z| < 1`
//! it is the circle `|a₁| = r/|a|`, with the phase free). The Ahlfors map is
//! the member of that family maximizing `ω′(a)`, so the search runs in two
//! stages: a deterministic derivative-free simplex drives the dispersion to
//! its null set, then a second pass adds a small multiple of `−ln c` to
//! slide along the null set to the extremal member. One factorization of the
//! system matrix is reused for every evaluation, since only the right-hand
//! side depends on the candidates.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ParametrizedBoundary, PointLocation};
use crate::kernels::{DiscretizationContext, DiscreteOperators};
use crate::rh_solver::{build_gamma, compute_h, solve_mu_with, RhSystem};

/// Continuation schedule for the refinement stage: weight of the `−ln c`
/// term, simplex step as a fraction of the region extent, and diameter
/// tolerance. A strong pull travels quickly along the dispersion null set;
/// the weaker passes shrink the transverse bias (proportional to the weight)
/// below the target accuracy while keeping the along-set differences above
/// f64 resolution.
const REFINEMENT_SCHEDULE: [(f64, f64, f64); 3] = [
    (1e-2, 2.5e-2, 1e-6),
    (1e-5, 1e-3, 1e-8),
    (1e-8, 1e-4, 1e-10),
];

/// Search parameters; `initial` must hold one guess per hole.
#[derive(Debug, Clone)]
pub struct ZeroSearchConfig {
    pub initial: Vec<Complex64>,
    pub max_iterations: usize,
    /// Converged when the objective drops below this.
    pub tolerance: f64,
    /// Base value added to the objective for infeasible candidates.
    pub penalty: f64,
    /// Initial simplex step, as a fraction of the region extent.
    pub simplex_step: f64,
}

impl ZeroSearchConfig {
    pub fn new(initial: Vec<Complex64>) -> Self {
        Self {
            initial,
            max_iterations: 500,
            tolerance: 1e-12,
            penalty: 1e6,
            simplex_step: 0.05,
        }
    }
}

/// One entry of the search trace.
#[derive(Debug, Clone, Copy)]
pub struct SearchStep {
    /// 1 = dispersion minimization, 2 = extremal refinement.
    pub stage: u8,
    pub iteration: usize,
    /// Best value of that stage's objective so far.
    pub objective: f64,
}

/// Result of a zero search.
#[derive(Debug, Clone)]
pub struct ZeroSearchOutcome {
    pub zeros: Vec<Complex64>,
    /// The h-uniformity objective at the returned zeros.
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub history: Vec<SearchStep>,
}

/// A fixed geometry/base-point/auxiliary-point setup over which candidate
/// zeros are scored.
pub struct ZeroSearch<'a> {
    ctx: &'a DiscretizationContext,
    ops: DiscreteOperators,
    system: RhSystem,
    aux: Vec<Complex64>,
}

impl<'a> ZeroSearch<'a> {
    pub fn new(ctx: &'a DiscretizationContext, aux: &[Complex64]) -> Result<Self> {
        let holes = ctx.boundary().connectivity() - 1;
        if holes == 0 {
            return Err(Error::InvalidInput(
                "the region is simply connected; there are no zeros to search for".into(),
            ));
        }
        if aux.len() != holes {
            return Err(Error::LengthMismatch {
                expected: holes,
                got: aux.len(),
            });
        }
        let ops = DiscreteOperators::assemble(ctx);
        let system = RhSystem::factor(&ops)?;
        Ok(Self {
            ctx,
            ops,
            system,
            aux: aux.to_vec(),
        })
    }

    /// The h-uniformity objective `Σ_j (h_j − h_1)²` for candidate zeros,
    /// with a penalty (no solve attempted) for candidates outside the
    /// region, inside a hole, or within a node spacing of Γ or of `a`.
    pub fn objective(&self, candidates: &[Complex64]) -> f64 {
        self.objective_with_penalty(candidates, 1e6)
    }

    fn objective_with_penalty(&self, candidates: &[Complex64], penalty: f64) -> f64 {
        if let Some(excess) = self.infeasibility(candidates) {
            return penalty * (1.0 + excess);
        }
        match self.solve_objective(candidates) {
            Ok((dispersion, _)) => dispersion,
            Err(_) => penalty,
        }
    }

    /// Dispersion plus a weighted extremal term, used by the refinement
    /// stage.
    fn refined_with_penalty(&self, candidates: &[Complex64], weight: f64, penalty: f64) -> f64 {
        if let Some(excess) = self.infeasibility(candidates) {
            return penalty * (1.0 + excess);
        }
        match self.solve_objective(candidates) {
            Ok((dispersion, minus_ln_c)) => dispersion + weight * minus_ln_c,
            Err(_) => penalty,
        }
    }

    /// Returns the dispersion objective and `−ln c` for feasible candidates.
    fn solve_objective(&self, candidates: &[Complex64]) -> Result<(f64, f64)> {
        let gamma = build_gamma(self.ctx, candidates, &self.aux)?;
        let mu = solve_mu_with(&self.system, &self.ops, &gamma)?.mu;
        let (h, _, _) = compute_h(&self.ops, &gamma, &mu)?;
        let h1 = h.value(0);
        let dispersion = h
            .values()
            .iter()
            .skip(1)
            .map(|hj| (hj - h1) * (hj - h1))
            .sum();
        let a = self.ctx.base_point();
        let minus_ln_c = h.mean()
            + candidates
                .iter()
                .zip(&self.aux)
                .map(|(&aj, &zj)| ((a - zj).norm() / (a - aj).norm()).ln())
                .sum::<f64>();
        Ok((dispersion, minus_ln_c))
    }

    /// Distance-like measure of how badly the candidates violate the
    /// feasible set, or `None` when all of them are admissible.
    fn infeasibility(&self, candidates: &[Complex64]) -> Option<f64> {
        let b = self.ctx.boundary();
        let a = self.ctx.base_point();
        let mut excess = 0.0;
        let mut infeasible = false;
        for &cand in candidates {
            if !cand.is_finite() {
                return Some(1.0);
            }
            match b.point_in_region(cand) {
                PointLocation::Inside => {
                    let a_margin = b.component_spacing(b.connectivity() - 1);
                    if (cand - a).norm() < a_margin {
                        infeasible = true;
                        excess += a_margin - (cand - a).norm();
                    }
                }
                PointLocation::Outside | PointLocation::NearBoundary => {
                    infeasible = true;
                    // Distance into the forbidden zone guides the simplex back.
                    excess += b.boundary_distance(cand);
                }
            }
        }
        infeasible.then_some(excess)
    }

    /// Runs the two-stage simplex minimization from `config.initial`.
    /// Infeasible guesses are admitted and recovered through the penalty.
    pub fn run(&self, config: &ZeroSearchConfig) -> Result<ZeroSearchOutcome> {
        let holes = self.ctx.boundary().connectivity() - 1;
        if config.initial.len() != holes {
            return Err(Error::LengthMismatch {
                expected: holes,
                got: config.initial.len(),
            });
        }
        for &guess in &config.initial {
            if !guess.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "initial guess {guess} is not finite"
                )));
            }
        }
        let extent = self.ctx.boundary().extent();
        let x0 = pack(&config.initial);
        let step = config.simplex_step * extent;

        let uniform = nelder_mead(
            |x| self.objective_with_penalty(&unpack(x), config.penalty),
            &x0,
            step,
            config.tolerance,
            1e-10,
            config.max_iterations,
        );

        let mut history: Vec<SearchStep> = Vec::new();
        for (it, &obj) in uniform.history.iter().enumerate() {
            history.push(SearchStep {
                stage: 1,
                iteration: it,
                objective: obj,
            });
        }

        // Slide along the dispersion null set towards the extremal member.
        let mut x = uniform.x;
        let mut iterations = uniform.iterations;
        let mut evaluations = uniform.evaluations;
        let mut refinement_converged = true;
        let mut stage2_iteration = 0usize;
        for (weight, step_factor, tol_x) in REFINEMENT_SCHEDULE {
            let pass = nelder_mead(
                |coords| self.refined_with_penalty(&unpack(coords), weight, config.penalty),
                &x,
                step_factor * extent,
                f64::NEG_INFINITY,
                tol_x,
                config.max_iterations,
            );
            for &obj in &pass.history {
                history.push(SearchStep {
                    stage: 2,
                    iteration: stage2_iteration,
                    objective: obj,
                });
                stage2_iteration += 1;
            }
            x = pass.x;
            iterations += pass.iterations;
            evaluations += pass.evaluations;
            refinement_converged &= pass.converged;
        }

        let zeros = unpack(&x);
        let objective = self.objective_with_penalty(&zeros, config.penalty);
        Ok(ZeroSearchOutcome {
            zeros,
            objective,
            iterations,
            evaluations: evaluations + 1,
            converged: uniform.converged && refinement_converged && objective < config.tolerance,
            history,
        })
    }
}

/// One-call form: assemble, factor, and search.
pub fn find_zeros(
    ctx: &DiscretizationContext,
    aux: &[Complex64],
    config: &ZeroSearchConfig,
) -> Result<ZeroSearchOutcome> {
    ZeroSearch::new(ctx, aux)?.run(config)
}

/// Default initial guesses: just beyond the far rim of each hole as seen
/// from the base point, using the sampled centroid and radius. The exact
/// far-rim point sits on the curve itself, so it is pushed 25% further out
/// to clear the feasibility margin.
pub fn default_initial_guesses(
    boundary: &ParametrizedBoundary,
    a: Complex64,
) -> Vec<Complex64> {
    (0..boundary.connectivity() - 1)
        .map(|j| {
            let center = boundary.centroid(j);
            let radius = boundary.eta()[boundary.component_range(j)]
                .iter()
                .map(|e| (e - center).norm())
                .fold(0.0, f64::max);
            let dir = (a - center) / (a - center).norm();
            center - 1.25 * radius * dir
        })
        .collect()
}

fn pack(points: &[Complex64]) -> Vec<f64> {
    points.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unpack(coords: &[f64]) -> Vec<Complex64> {
    coords
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}

struct SimplexResult {
    x: Vec<f64>,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    history: Vec<f64>,
}

/// Deterministic Nelder–Mead with the standard coefficients
/// (reflect 1, expand 2, contract 1/2, shrink 1/2).
fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    tol_f: f64,
    tol_x: f64,
    max_iterations: usize,
) -> SimplexResult {
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0, &mut evaluations);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut xi = x0.to_vec();
        xi[i] += step;
        let fi = eval(&xi, &mut evaluations);
        simplex.push((xi, fi));
    }

    let mut history = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        history.push(best);

        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if best < tol_f || diameter < tol_x {
            converged = true;
            break;
        }
        iterations += 1;

        let worst = simplex[dim].clone();
        let second_worst = simplex[dim - 1].1;
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }

        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_reflected = eval(&reflected, &mut evaluations);

        if f_reflected < simplex[0].1 {
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let f_expanded = eval(&expanded, &mut evaluations);
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < second_worst {
            simplex[dim] = (reflected, f_reflected);
        } else {
            let (towards, f_towards) = if f_reflected < worst.1 {
                (&reflected, f_reflected)
            } else {
                (&worst.0, worst.1)
            };
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(towards)
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            let f_contracted = eval(&contracted, &mut evaluations);
            if f_contracted < f_towards {
                simplex[dim] = (contracted, f_contracted);
            } else {
                let best_x = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for (v, b) in x.iter_mut().zip(&best_x) {
                        *v = b + 0.5 * (*v - b);
                    }
                    *fx = eval(x, &mut evaluations);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexResult {
        x: simplex[0].0.clone(),
        iterations,
        evaluations,
        converged,
        history,
    }
}
