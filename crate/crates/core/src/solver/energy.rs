//! The concave transport energy `E(h) = Σ h_i ν_i − ∫_Ω u_h dμ` and its derivatives.
//!
//! `∇E = ν − w(h)`, where `w_i` is the μ-mass of power cell `i`. Off the diagonal the
//! Hessian is `∂²E/∂h_i∂h_j = μ(W_i ∩ W_j)/|y_i − y_j|` (boundary measure over site
//! distance) for adjacent cells and zero otherwise; the diagonal is the negated row
//! sum. The matrix is negative semidefinite with the constant vector in its kernel.

use crate::error::{Error, Result};
use crate::geometry::quadrature::Quadratic;
use crate::geometry::{HeightVector, NormalizedDiagram, NormalizedProblem, Site};
use crate::measure::SourceDensity;
use crate::scalar::Real;
use crate::solver::SparseSymmetric;

/// Diagram, cell masses and normalized energy at one height vector.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation<S> {
    pub heights: Vec<S>,
    pub diagram: NormalizedDiagram<S>,
    /// `∫ ũ dμ` in the normalized frame.
    pub alexandrov: S,
    /// `Σ h̃_i ν_i − ∫ ũ dμ`.
    pub energy: S,
}

impl<S: Real> Evaluation<S> {
    pub fn new(problem: &NormalizedProblem<S>, heights: Vec<S>) -> Self {
        let diagram = problem.build(&heights);
        let alexandrov = diagram
            .polygons
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                p.as_ref().map(|p| {
                    problem
                        .density
                        .integrate(p, &Quadratic::affine(problem.sites[i], heights[i]))
                })
            })
            .sum::<S>();
        let linear: S = heights
            .iter()
            .zip(&problem.masses)
            .map(|(&h, &m)| h * m)
            .sum();
        Self {
            heights,
            diagram,
            alexandrov,
            energy: linear - alexandrov,
        }
    }

    /// Rounding error bound of `energy`, below which energy comparisons carry no
    /// information.
    pub fn rounding_slack(&self) -> S {
        let linear = self.energy + self.alexandrov;
        S::lit(64.0) * S::epsilon() * (linear.abs() + self.alexandrov.abs())
    }

    pub fn gradient(&self, problem: &NormalizedProblem<S>) -> Vec<S> {
        problem
            .masses
            .iter()
            .zip(&self.diagram.measures)
            .map(|(&nu, &w)| nu - w)
            .collect()
    }

    pub fn first_empty_cell(&self) -> Option<usize> {
        self.diagram.polygons.iter().position(Option::is_none)
    }

    /// Hessian in normalized units.
    pub fn hessian(&self) -> SparseSymmetric<S> {
        let entries = self
            .diagram
            .edges
            .iter()
            .map(|e| (e.i, e.j, e.face_measure / e.site_distance))
            .collect();
        SparseSymmetric::from_offdiagonal(self.diagram.measures.len(), entries)
    }

    /// Energy in original units.
    pub fn original_energy(&self, problem: &NormalizedProblem<S>) -> S {
        problem.energy_scale() * self.energy + problem.energy_offset()
    }
}

fn evaluate<S: Real>(
    sites: &[Site<S>],
    heights: &HeightVector<S>,
    density: &SourceDensity<S>,
) -> Result<(NormalizedProblem<S>, Evaluation<S>)> {
    let problem = NormalizedProblem::new(sites, density)?;
    heights.validate(sites.len())?;
    let hn = problem.to_normalized_heights(heights.as_slice());
    let eval = Evaluation::new(&problem, hn);
    Ok((problem, eval))
}

/// `E(h) = Σ h_i ν_i − ∫_Ω u_h dμ` (integration constant fixed at zero).
pub fn energy<S: Real>(
    sites: &[Site<S>],
    heights: &HeightVector<S>,
    density: &SourceDensity<S>,
) -> Result<S> {
    let (problem, eval) = evaluate(sites, heights, density)?;
    Ok(eval.original_energy(&problem))
}

/// `𝒜(h) = ∫_Ω u_h dμ`, convex in `h`.
pub fn alexandrov_potential<S: Real>(
    sites: &[Site<S>],
    heights: &HeightVector<S>,
    density: &SourceDensity<S>,
) -> Result<S> {
    let (problem, eval) = evaluate(sites, heights, density)?;
    let s = problem.frame.scale;
    Ok(problem.energy_scale() * eval.alexandrov
        + s * problem.first_moment.dot(&problem.frame.site_center))
}

/// `∇E(h) = (ν_i − w_i(h))_i`.
pub fn gradient<S: Real>(
    sites: &[Site<S>],
    heights: &HeightVector<S>,
    density: &SourceDensity<S>,
) -> Result<Vec<S>> {
    let (problem, eval) = evaluate(sites, heights, density)?;
    Ok(eval.gradient(&problem))
}

/// Hessian of `E` in original units. Fails when a cell is empty.
pub fn hessian<S: Real>(
    sites: &[Site<S>],
    heights: &HeightVector<S>,
    density: &SourceDensity<S>,
) -> Result<SparseSymmetric<S>> {
    let (problem, eval) = evaluate(sites, heights, density)?;
    if let Some(site) = eval.first_empty_cell() {
        return Err(Error::NotAdmissible { site });
    }
    Ok(eval.hessian().scaled(S::one() / problem.energy_scale()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolygon, Point};

    fn square() -> SourceDensity<f64> {
        SourceDensity::uniform(ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap())
    }

    fn pair() -> Vec<Site<f64>> {
        vec![
            Site::new(Point::new(-1.0, 0.0), 0.5),
            Site::new(Point::new(1.0, 0.0), 0.5),
        ]
    }

    #[test]
    fn symmetric_pair_energy() {
        let e = energy(&pair(), &HeightVector::zeros(2), &square()).unwrap();
        assert!((e + 0.5).abs() < 1e-15, "{e}");
        let a = alexandrov_potential(&pair(), &HeightVector::zeros(2), &square()).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauge_shift_leaves_energy_unchanged() {
        let h = HeightVector::new(vec![0.1, -0.3]);
        let e0 = energy(&pair(), &h, &square()).unwrap();
        let e1 = energy(&pair(), &h.shifted(2.5), &square()).unwrap();
        assert!((e0 - e1).abs() < 1e-14);
    }

    #[test]
    fn single_site_at_origin() {
        let sites = vec![Site::new(Point::new(0.0, 0.0), 1.0)];
        for h in [-3.0, 0.0, 0.7] {
            let hv = HeightVector::new(vec![h]);
            assert!(energy(&sites, &hv, &square()).unwrap().abs() < 1e-15);
            assert!((alexandrov_potential(&sites, &hv, &square()).unwrap() - h).abs() < 1e-15);
        }
    }

    #[test]
    fn shifted_pair_gradient_and_hessian() {
        let h = HeightVector::new(vec![0.0, 0.5]);
        let g = gradient(&pair(), &h, &square()).unwrap();
        assert!((g[0] - 0.125).abs() < 1e-15 && (g[1] + 0.125).abs() < 1e-15);
        let hess = hessian(&pair(), &h, &square()).unwrap();
        let dense = hess.to_dense();
        let expected = [[-0.25, 0.25], [0.25, -0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((dense[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hessian_rejects_empty_cell() {
        let sites = vec![
            Site::new(Point::new(-1.0, 0.0), 0.4),
            Site::new(Point::new(0.0, 0.0), 0.2),
            Site::new(Point::new(1.0, 0.0), 0.4),
        ];
        let h = HeightVector::new(vec![0.0, -5.0, 0.0]);
        assert_eq!(
            hessian(&sites, &h, &square()),
            Err(Error::NotAdmissible { site: 1 })
        );
    }
}
