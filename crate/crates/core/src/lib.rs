//! Ahlfors maps of bounded multiply connected regions.
//!
//! The map is computed from a boundary integral equation with the
//! generalized Neumann kernel: the boundary condition `Re[A f] = γ + h` for
//! the auxiliary function `f` is reduced to `(I − N)μ = −Mγ`, discretized by
//! the Nyström method with the trapezoidal rule, and solved densely. The
//! piecewise constant `h` recovered from the solution yields the
//! normalization `c = ω′(a)`; interior values come from a Cauchy integral of
//! the boundary data, and the unknown zeros of the map are located by
//! driving the spread of `h` across boundary components to zero.
//!
//! Pipeline: [`geometry::discretize`] → [`kernels::DiscretizationContext`] →
//! [`kernels::DiscreteOperators`] → [`rh_solver::solve_rh`] →
//! [`ahlfors::AhlforsSolution`], with [`zeros::find_zeros`] wrapping the
//! search loop when the zeros are unknown.

pub mod ahlfors;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod rh_solver;
pub mod zeros;

pub use ahlfors::{AhlforsSolution, GridSpec, MappedGrid, Polyline};
pub use error::{Error, Result};
pub use geometry::{
    discretize, BoundaryScalar, CurveKind, CurveSpec, ParametrizedBoundary, PiecewiseConstant,
    PointLocation,
};
pub use kernels::{DiscretizationContext, DiscreteOperators};
pub use rh_solver::{CauchyKind, InteriorValue, RhSolution, RhSystem};
pub use zeros::{find_zeros, ZeroSearch, ZeroSearchConfig, ZeroSearchOutcome};
