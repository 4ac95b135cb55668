//! Solvers for the semi-discrete problem and a discrete linear-programming oracle.

use std::time::Duration;

use crate::error::{invalid, Result};
use crate::geometry::HeightVector;
use crate::scalar::Real;

mod energy;
pub mod linalg;
pub mod lp;
mod newton;
mod sgd;

pub use energy::{alexandrov_potential, energy, gradient, hessian};
pub use linalg::SparseSymmetric;
pub use lp::{lp_oracle, transport_simplex, DiscreteTransportPlan};
pub use newton::{newton_solve, Initialization, Solution};
pub use sgd::{sgd_solve, SgdConfig, SgdReport, SourceSampler, UniformBox};

/// Parameters of the damped Newton solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S> {
    /// Stop when `max_i |ν_i − w_i| ≤ tol_gradient_inf`.
    pub tol_gradient_inf: S,
    pub max_iterations: usize,
    /// Step multiplier applied after each rejected trial, in `(0, 1)`.
    pub line_search_shrink: S,
    /// Trial steps must keep `w_i ≥ min_cell_fraction·ν_i` (capped by half the starting mass).
    pub min_cell_fraction: S,
    /// Diagonal shift added to the reduced Newton matrix.
    pub regularization_eps: S,
}

impl<S: Real> Default for SolverConfig<S> {
    fn default() -> Self {
        Self {
            tol_gradient_inf: S::lit(1e-7),
            max_iterations: 100,
            line_search_shrink: S::lit(0.5),
            min_cell_fraction: S::lit(0.1),
            regularization_eps: S::lit(1e-12),
        }
    }
}

impl<S: Real> SolverConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_gradient_inf > S::zero()) {
            return invalid("tol_gradient_inf must be positive");
        }
        if !(self.line_search_shrink > S::zero() && self.line_search_shrink < S::one()) {
            return invalid("line_search_shrink must lie in (0, 1)");
        }
        if !(self.min_cell_fraction > S::zero() && self.min_cell_fraction < S::one()) {
            return invalid("min_cell_fraction must lie in (0, 1)");
        }
        if !(self.regularization_eps >= S::zero()) || !self.regularization_eps.is_finite() {
            return invalid("regularization_eps must be finite and nonnegative");
        }
        Ok(())
    }
}

/// History of a Newton solve. Entry `k` of each trace belongs to iterate `k`.
///
/// The energy trace is non-decreasing up to the rounding error of the energy itself.
#[derive(Debug, Clone)]
pub struct SolverReport<S> {
    pub iterations: usize,
    pub converged: bool,
    pub initialization: Initialization,
    pub gradient_inf_norm: Vec<S>,
    pub energy: Vec<S>,
    /// Accepted damping factor of each step.
    pub step_sizes: Vec<S>,
    /// Heights of every iterate, before gauge normalization.
    pub trajectory: Vec<HeightVector<S>>,
    pub wall_time: Duration,
}

impl<S> SolverReport<S> {
    pub(crate) fn new(initialization: Initialization) -> Self {
        Self {
            iterations: 0,
            converged: false,
            initialization,
            gradient_inf_norm: Vec::new(),
            energy: Vec::new(),
            step_sizes: Vec::new(),
            trajectory: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }
}
