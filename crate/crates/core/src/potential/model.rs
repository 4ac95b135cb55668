use crate::error::{invalid, Error, Result};
use crate::geometry::quadrature::Quadratic;
use crate::geometry::{build_power_diagram, HeightVector, Point, PowerDiagram, Site, EPS_GEOM};
use crate::measure::SourceDensity;
use crate::potential::{heights_from_weights, u_eval, weights_from_heights, BrenierPotential};
use crate::scalar::Real;
use crate::solver::{newton_solve, Solution, SolverConfig, SolverReport};

/// `Σ_i ∫_{W_i} ½|x − y_i|² dμ` over the cells of `diagram`.
pub fn transport_cost_of<S: Real>(
    sites: &[Site<S>],
    diagram: &PowerDiagram<S>,
    density: &SourceDensity<S>,
) -> S {
    diagram
        .cells
        .iter()
        .filter_map(|c| {
            c.polygon.as_ref().map(|p| {
                density.integrate(p, &Quadratic::half_squared_distance(sites[c.site_index].position))
            })
        })
        .sum()
}

/// `E_D(ψ) = Σ ψ_i (ν_i − w_i(ψ)) + Σ_j ∫_{W_j(ψ)} ½|x − y_j|² dμ`.
pub fn dual_energy<S: Real>(sites: &[Site<S>], psi: &[S], density: &SourceDensity<S>) -> Result<S> {
    if psi.len() != sites.len() {
        return invalid(format!("expected {} weights, got {}", sites.len(), psi.len()));
    }
    let heights = heights_from_weights(sites, psi);
    let diagram = build_power_diagram(sites, &heights, density)?;
    let linear: S = sites
        .iter()
        .zip(psi)
        .zip(&diagram.cells)
        .map(|((s, &p), c)| p * (s.mass - c.measure))
        .sum();
    Ok(linear + transport_cost_of(sites, &diagram, density))
}

/// A Brenier potential together with its power diagram over a source density.
///
/// The transport map `T = ∇u_h` sends each cell to its site.
#[derive(Debug, Clone)]
pub struct TransportModel<S> {
    potential: BrenierPotential<S>,
    diagram: PowerDiagram<S>,
    density: SourceDensity<S>,
    transport_cost: S,
    wasserstein: S,
    solved: bool,
}

impl<S: Real> TransportModel<S> {
    /// Model for arbitrary heights. `solved` records whether the cell masses are
    /// known to match the site masses.
    pub fn from_heights(
        sites: Vec<Site<S>>,
        heights: HeightVector<S>,
        density: SourceDensity<S>,
        solved: bool,
    ) -> Result<Self> {
        let diagram = build_power_diagram(&sites, &heights, &density)?;
        Self::assemble(sites, heights, diagram, density, solved)
    }

    /// Model from a Newton solution; solved iff the solver converged.
    pub fn from_solution(sites: Vec<Site<S>>, solution: Solution<S>, density: SourceDensity<S>) -> Result<Self> {
        let solved = solution.report.converged;
        Self::assemble(sites, solution.heights, solution.diagram, density, solved)
    }

    /// Solves the semi-discrete problem and wraps the result.
    pub fn solve(
        sites: Vec<Site<S>>,
        density: SourceDensity<S>,
        config: &SolverConfig<S>,
    ) -> Result<(Self, SolverReport<S>)> {
        let solution = newton_solve(&sites, &density, config)?;
        let report = solution.report.clone();
        Ok((Self::from_solution(sites, solution, density)?, report))
    }

    fn assemble(
        sites: Vec<Site<S>>,
        heights: HeightVector<S>,
        diagram: PowerDiagram<S>,
        density: SourceDensity<S>,
        solved: bool,
    ) -> Result<Self> {
        let transport_cost = transport_cost_of(&sites, &diagram, &density);
        let psi = weights_from_heights(&sites, &heights);
        // ∫ φ dζ with φ = ½|x − y_i|² − ψ_i on cell i, plus Σ ν_j ψ_j.
        let wasserstein = transport_cost
            + sites
                .iter()
                .zip(&psi)
                .zip(&diagram.cells)
                .map(|((s, &p), c)| p * (s.mass - c.measure))
                .sum::<S>();
        Ok(Self {
            potential: BrenierPotential::new(sites, heights)?,
            diagram,
            density,
            transport_cost,
            wasserstein,
            solved,
        })
    }

    pub fn potential(&self) -> &BrenierPotential<S> {
        &self.potential
    }

    pub fn sites(&self) -> &[Site<S>] {
        self.potential.sites()
    }

    pub fn heights(&self) -> &HeightVector<S> {
        self.potential.heights()
    }

    pub fn diagram(&self) -> &PowerDiagram<S> {
        &self.diagram
    }

    pub fn density(&self) -> &SourceDensity<S> {
        &self.density
    }

    pub fn is_solved(&self) -> bool {
        self.solved
    }

    /// Discrete Kantorovich potential `ψ`.
    pub fn weights(&self) -> Vec<S> {
        self.potential.weights()
    }

    fn check_inside(&self, x: &Point<S>) -> Result<()> {
        let domain = self.density.domain();
        if !x.is_finite() || !domain.contains(x, S::lit(EPS_GEOM) * domain.diameter()) {
            return Err(Error::OutOfDomain);
        }
        Ok(())
    }

    /// `T(x) = ∇u_h(x)`: the site of the cell containing `x` (lowest index on ties).
    pub fn transport_apply(&self, x: &Point<S>) -> Result<Point<S>> {
        self.check_inside(x)?;
        Ok(self.sites()[u_eval(&self.potential, x).1].position)
    }

    /// `T(x) = x − (∇k)⁻¹(∇φ(x))` for a strictly convex kernel `k(x − y)` given by its
    /// gradient and the inverse of its gradient. `∇φ(x) = x − y_i` on cell `i`.
    ///
    /// Fails with [`Error::UndefinedGradient`] when `x` is within `ε_geom` (relative to
    /// the domain diameter) of a face between two cells.
    pub fn dg_map(
        &self,
        x: &Point<S>,
        kernel_gradient: impl Fn(Point<S>) -> Point<S>,
        kernel_gradient_inverse: impl Fn(Point<S>) -> Point<S>,
    ) -> Result<Point<S>> {
        self.check_inside(x)?;
        let (top, i) = u_eval(&self.potential, x);
        let threshold = S::lit(EPS_GEOM) * self.density.domain().diameter();
        let yi = self.sites()[i].position;
        for (j, (s, &h)) in self.sites().iter().zip(&self.heights().0).enumerate() {
            if j == i {
                continue;
            }
            let gap = top - (x.dot(&s.position) + h);
            if gap <= threshold * (yi - s.position).norm() {
                return Err(Error::UndefinedGradient {
                    first: i.min(j),
                    second: i.max(j),
                });
            }
        }
        let grad_phi = *x - yi;
        let v = kernel_gradient_inverse(grad_phi);
        let back = kernel_gradient(v);
        let scale = grad_phi.norm().max(S::one());
        if !((back - grad_phi).norm() <= S::lit(1e-9) * scale) {
            return invalid("kernel gradient and its inverse do not match");
        }
        Ok(*x - v)
    }

    /// `Σ_i ∫_{W_i} ½|x − y_i|² dμ`.
    pub fn transport_cost(&self) -> S {
        self.transport_cost
    }

    /// `W = ∫ φ dζ + Σ_j ν_j ψ_j`, the dual value of the transport problem.
    ///
    /// Requires a solved model fitted against `zeta`.
    pub fn wasserstein(&self, zeta: &SourceDensity<S>) -> Result<S> {
        if !self.solved {
            return Err(Error::InvalidState(
                "the Wasserstein distance needs a solved transport model".into(),
            ));
        }
        if zeta != &self.density {
            return invalid("the model was solved against a different source density");
        }
        Ok(self.wasserstein)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;

    fn square() -> SourceDensity<f64> {
        SourceDensity::uniform(ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap())
    }

    fn id(p: Point<f64>) -> Point<f64> {
        p
    }

    fn pair_model(h1: f64, solved: bool) -> TransportModel<f64> {
        let sites = vec![
            Site::new(Point::new(-1.0, 0.0), 0.5),
            Site::new(Point::new(1.0, 0.0), 0.5),
        ];
        TransportModel::from_heights(sites, HeightVector::new(vec![0.0, h1]), square(), solved).unwrap()
    }

    #[test]
    fn single_site_cost_and_distance() {
        for h in [0.0, 3.7] {
            let sites = vec![Site::new(Point::new(0.0, 0.0), 1.0)];
            let m = TransportModel::from_heights(sites, HeightVector::new(vec![h]), square(), true).unwrap();
            assert!((m.transport_cost() - 1.0 / 3.0).abs() < 1e-15);
            assert!((m.wasserstein(&square()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
            assert_eq!(m.transport_apply(&Point::new(0.9, -0.2)).unwrap(), Point::new(0.0, 0.0));
        }
    }

    #[test]
    fn two_site_map() {
        let m = pair_model(0.5, false);
        let x = Point::new(0.5, 0.0);
        assert_eq!(m.transport_apply(&x).unwrap(), Point::new(1.0, 0.0));
        assert_eq!(m.dg_map(&x, id, id).unwrap(), Point::new(1.0, 0.0));
    }

    #[test]
    fn errors() {
        let m = pair_model(0.0, false);
        assert_eq!(m.transport_apply(&Point::new(2.0, 0.0)), Err(Error::OutOfDomain));
        assert!(matches!(
            m.dg_map(&Point::new(0.0, 0.4), id, id),
            Err(Error::UndefinedGradient { first: 0, second: 1 })
        ));
        assert!(matches!(m.wasserstein(&square()), Err(Error::InvalidState(_))));
        let double = |p: Point<f64>| p * 2.0;
        assert!(m.dg_map(&Point::new(0.5, 0.0), double, id).is_err());
    }

    #[test]
    fn symmetric_pair_dual_energy_equals_cost() {
        let m = pair_model(0.0, true);
        let ed = dual_energy(m.sites(), &m.weights(), &square()).unwrap();
        assert!((ed - m.transport_cost()).abs() < 1e-15);
        assert!((m.wasserstein(&square()).unwrap() - m.transport_cost()).abs() < 1e-15);
        let left = ConvexPolygon::rectangle(-1.0, -1.0, 0.0, 1.0).unwrap();
        let expect = 2.0 * square().integrate(&left, &Quadratic::half_squared_distance(Point::new(-1.0, 0.0)));
        assert!((m.transport_cost() - expect).abs() < 1e-15);
    }

    #[test]
    fn single_site_dual_energy_ignores_weight() {
        let sites = vec![Site::new(Point::new(0.2, 0.1), 1.0)];
        for psi in [-2.0, 0.0, 5.0] {
            let ed = dual_energy(&sites, &[psi], &square()).unwrap();
            let expect = 1.0 / 3.0 + 0.5 * (0.04 + 0.01);
            assert!((ed - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn gauge_shift_keeps_cost_and_map() {
        let a = pair_model(0.3, true);
        let sites = a.sites().to_vec();
        let b = TransportModel::from_heights(sites, a.heights().shifted(7.0), square(), true).unwrap();
        assert_eq!(a.transport_apply(&Point::new(0.1, 0.2)), b.transport_apply(&Point::new(0.1, 0.2)));
        assert!((a.transport_cost() - b.transport_cost()).abs() < 1e-14);
        assert!((a.wasserstein(&square()).unwrap() - b.wasserstein(&square()).unwrap()).abs() < 1e-13);
    }
}
