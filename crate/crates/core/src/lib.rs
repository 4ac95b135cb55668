//! # sdot
//!
//! Semi-discrete optimal transport in the plane for the quadratic cost.
//!
//! Given an absolutely continuous source measure `μ` on a convex polygon `Ω` and a
//! discrete target `ν = Σ ν_i δ_{y_i}`, the optimal map is the gradient of the convex
//! piecewise-linear Brenier potential `u_h(x) = max_i ⟨x, y_i⟩ + h_i`. The heights
//! `h` maximize the concave energy `E(h) = Σ h_i ν_i − ∫_Ω u_h dμ`, whose gradient is
//! `ν − w(h)` (target minus power-cell masses) and whose Hessian is assembled on the
//! weighted Delaunay triangulation dual to the power diagram.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`geometry`] | convex polygons, half-plane clipping, power diagrams, exact quadrature |
//! | [`measure`] | source densities, empirical measures, Gaussian mixtures, seeded streams |
//! | [`solver`] | energy, gradient, Hessian, damped Newton, Monte Carlo ascent, exact LP |
//! | [`potential`] | Brenier/Kantorovich potentials, c-transform, transport map, Wasserstein |
//! | [`genmodel`] | fit-then-push-forward generative sampling |
//!
//! Everything numerical is generic over [`Real`] (`f32`/`f64`); the potential algebra
//! and the transportation LP only need a [`Field`] and also run over exact rationals.
//! The aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod error;
pub mod genmodel;
pub mod geometry;
pub mod measure;
pub mod potential;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::{Field, LpScalar, Real};

pub use geometry::{ConvexPolygon, HeightVector, Point, PowerDiagram, Site};
pub use measure::{EmpiricalMeasure, RandomSeed, SourceDensity};
pub use potential::{BrenierPotential, TransportModel};
pub use solver::{newton_solve, SolverConfig, SolverReport};

pub type Point64 = geometry::Point<f64>;
pub type Site64 = geometry::Site<f64>;
pub type Heights64 = geometry::HeightVector<f64>;
pub type Polygon64 = geometry::ConvexPolygon<f64>;
pub type Diagram64 = geometry::PowerDiagram<f64>;
pub type Density64 = measure::SourceDensity<f64>;
pub type Empirical64 = measure::EmpiricalMeasure<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type SolverReport64 = solver::SolverReport<f64>;
pub type TransportModel64 = potential::TransportModel<f64>;
pub type GenerativeModel64 = genmodel::GenerativeModel<f64>;

/// Exact rational scalar for the LP oracle and potential algebra.
pub type Rational = num_rational::Ratio<i64>;
