//! Planar geometry: points, convex polygons, exact quadrature and power diagrams.

mod point;
mod polygon;
mod power;
pub mod quadrature;

pub use point::Point;
pub use polygon::{half_plane_clip, ConvexPolygon};
pub use power::{build_power_diagram, legendre_dual_values, DualEdge, PowerCell, PowerDiagram};
pub(crate) use power::{NormalizedDiagram, NormalizedProblem};
pub use quadrature::{polygon_moment, Quadratic};

use crate::error::{invalid, Result};
use crate::scalar::{Field, Real};

/// Absolute geometric tolerance, applied after the domain is rescaled to unit diameter.
pub const EPS_GEOM: f64 = 1e-12;

/// A target atom `ν_i δ_{y_i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site<T> {
    pub position: Point<T>,
    pub mass: T,
}

impl<T> Site<T> {
    pub const fn new(position: Point<T>, mass: T) -> Self {
        Self { position, mass }
    }
}

/// Builds sites with equal masses `total / n`.
pub fn sites_with_equal_mass<S: Real>(positions: &[Point<S>], total: S) -> Vec<Site<S>> {
    let m = total / S::from_usize_lossy(positions.len());
    positions.iter().map(|&p| Site::new(p, m)).collect()
}

/// Heights `h` of the supporting planes `⟨x, y_i⟩ + h_i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeightVector<T>(pub Vec<T>);

impl<T: Field> HeightVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![T::zero(); k])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `h + c·1`.
    pub fn shifted(&self, c: T) -> Self {
        Self(self.0.iter().map(|v| v.clone() + c.clone()).collect())
    }
}

impl<S: Real> HeightVector<S> {
    /// Canonical gauge: subtract the mean so that `Σ h_i = 0`.
    pub fn gauge_normalized(&self) -> Self {
        if self.0.is_empty() {
            return self.clone();
        }
        let mean = self.0.iter().copied().sum::<S>() / S::from_usize_lossy(self.0.len());
        self.shifted(-mean)
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.0.len() != k {
            return invalid(format!("expected {k} heights, got {}", self.0.len()));
        }
        if self.0.iter().any(|v| !v.is_finite()) {
            return invalid("heights must be finite");
        }
        Ok(())
    }
}

impl<T> From<Vec<T>> for HeightVector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

pub(crate) fn validate_sites<S: Real>(sites: &[Site<S>]) -> Result<()> {
    if sites.is_empty() {
        return invalid("at least one site is required");
    }
    for (k, s) in sites.iter().enumerate() {
        if !s.position.is_finite() {
            return invalid(format!("site {k} has non-finite coordinates"));
        }
        if !(s.mass > S::zero() && s.mass.is_finite()) {
            return invalid(format!("site {k} must have positive finite mass"));
        }
    }
    Ok(())
}
