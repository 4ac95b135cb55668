use crate::error::{invalid, Result};
use crate::geometry::{Point, Site};
use crate::measure::SourceDensity;
use crate::scalar::{Field, Real};

/// A finite atomic measure `Σ m_a δ_{x_a}` in any dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<T> {
    points: Vec<Vec<T>>,
    masses: Vec<T>,
}

impl<T: Field> EmpiricalMeasure<T> {
    pub fn new(points: Vec<Vec<T>>, masses: Vec<T>) -> Result<Self> {
        if points.len() != masses.len() {
            return invalid("one mass per atom required");
        }
        if let Some(first) = points.first() {
            if points.iter().any(|p| p.len() != first.len()) {
                return invalid("atoms have inconsistent dimensions");
            }
        }
        if masses.iter().any(|m| !(m.clone() > T::zero())) {
            return invalid("atom masses must be positive");
        }
        Ok(Self { points, masses })
    }

    /// Equal masses `1/n` on each point.
    pub fn uniform(points: Vec<Vec<T>>) -> Result<Self> {
        let mut n = T::zero();
        for _ in &points {
            n = n + T::one();
        }
        let m = T::one() / n;
        let masses = vec![m; points.len()];
        Self::new(points, masses)
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

impl<S: Real> EmpiricalMeasure<S> {
    pub fn from_planar(points: &[Point<S>], masses: Vec<S>) -> Result<Self> {
        Self::new(points.iter().map(|p| vec![p.x, p.y]).collect(), masses)
    }

    /// Planar atoms as transport target sites.
    pub fn to_sites(&self) -> Result<Vec<Site<S>>> {
        if self.dim() != 2 && !self.is_empty() {
            return invalid("sites must be planar");
        }
        Ok(self
            .points
            .iter()
            .zip(&self.masses)
            .map(|(p, &m)| Site::new(Point::new(p[0], p[1]), m))
            .collect())
    }
}

/// Anything with a well-defined total mass.
pub trait TotalMass<T> {
    fn total_mass(&self) -> T;
}

impl<T: Field> TotalMass<T> for EmpiricalMeasure<T> {
    fn total_mass(&self) -> T {
        self.masses.iter().cloned().fold(T::zero(), |a, b| a + b)
    }
}

impl<S: Real> TotalMass<S> for SourceDensity<S> {
    fn total_mass(&self) -> S {
        SourceDensity::total_mass(self)
    }
}

/// Total mass of a density or an empirical measure.
pub fn measure_total<T, M: TotalMass<T>>(m: &M) -> T {
    m.total_mass()
}
