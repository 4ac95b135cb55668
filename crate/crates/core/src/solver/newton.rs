//! Damped Newton maximization of the transport energy.

use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::geometry::{HeightVector, NormalizedProblem, PowerDiagram, Site};
use crate::measure::SourceDensity;
use crate::scalar::{inf_norm, Real};
use crate::solver::energy::Evaluation;
use crate::solver::linalg::solve_pinned;
use crate::solver::{SolverConfig, SolverReport};

/// Heights solving the semi-discrete problem, their diagram and the solve history.
#[derive(Debug, Clone)]
pub struct Solution<S> {
    /// Gauge-normalized (`Σ h_i = 0`) heights.
    pub heights: HeightVector<S>,
    pub diagram: PowerDiagram<S>,
    pub report: SolverReport<S>,
}

/// How the starting heights were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initialization {
    /// `h_i = −½|y_i|²`: the ordinary Voronoi diagram of the sites.
    Voronoi,
    /// Voronoi diagram of the sites after an affine map placing them inside Ω, which
    /// guarantees every cell is nonempty.
    ContractedVoronoi,
}

fn check_balance<S: Real>(sites: &[Site<S>], density: &SourceDensity<S>) -> Result<()> {
    let total: S = sites.iter().map(|s| s.mass).sum();
    let mu = density.total_mass();
    if (total - mu).abs() > S::lit(1e-9) * mu {
        return invalid(format!(
            "target masses sum to {total} but the source has mass {mu}"
        ));
    }
    Ok(())
}

/// Normalized heights for the plain Voronoi start.
fn voronoi_start<S: Real>(problem: &NormalizedProblem<S>) -> Vec<S> {
    let h: Vec<S> = problem
        .original_sites
        .iter()
        .map(|y| -y.half_norm_squared())
        .collect();
    problem.to_normalized_heights(&h)
}

/// Normalized heights whose diagram is the Voronoi diagram of `c + α ỹ_i`, with the
/// contracted sites inside the inscribed disk around the mass centroid `c`.
fn contracted_voronoi_start<S: Real>(problem: &NormalizedProblem<S>) -> Vec<S> {
    let c = problem.density.mass_centroid();
    let alpha = S::lit(0.5) * problem.density.domain().inner_distance(&c);
    problem
        .sites
        .iter()
        .map(|y| -(c + *y * alpha).half_norm_squared() / alpha)
        .collect()
}

/// Maximizes `E` by damped Newton steps.
///
/// Each step solves the gauge-reduced Newton system and backtracks until every
/// cell keeps at least `min(min_cell_fraction·ν_i, w_i(h₀)/2)` mass and the energy
/// does not decrease by more than its own rounding error. If the iteration budget
/// runs out, the best iterate is returned with `report.converged == false`.
pub fn newton_solve<S: Real>(
    sites: &[Site<S>],
    density: &SourceDensity<S>,
    config: &SolverConfig<S>,
) -> Result<Solution<S>> {
    let start = Instant::now();
    config.validate()?;
    let problem = NormalizedProblem::new(sites, density)?;
    check_balance(sites, density)?;
    let k = problem.len();
    let nu = problem.masses.clone();

    let mut init = Initialization::Voronoi;
    let mut eval = Evaluation::new(&problem, voronoi_start(&problem));
    if eval.first_empty_cell().is_some() {
        init = Initialization::ContractedVoronoi;
        eval = Evaluation::new(&problem, contracted_voronoi_start(&problem));
        if let Some(site) = eval.first_empty_cell() {
            return Err(Error::NotAdmissible { site });
        }
    }
    let floor: Vec<S> = nu
        .iter()
        .zip(&eval.diagram.measures)
        .map(|(&n, &w)| (config.min_cell_fraction * n).min(S::lit(0.5) * w))
        .collect();

    let mut report = SolverReport::new(init);
    let mut converged = false;
    loop {
        let grad = eval.gradient(&problem);
        let gnorm = inf_norm(&grad);
        report.gradient_inf_norm.push(gnorm);
        report.energy.push(eval.original_energy(&problem));
        report
            .trajectory
            .push(HeightVector::new(problem.to_original_heights(&eval.heights)));
        if gnorm <= config.tol_gradient_inf {
            converged = true;
            break;
        }
        if report.iterations >= config.max_iterations || k == 1 {
            break;
        }
        let hess = eval.hessian();
        let Some(mut direction) = solve_pinned(&hess, &grad, config.regularization_eps) else {
            break;
        };
        let mean = direction.iter().copied().sum::<S>() / S::from_usize_lossy(k);
        for d in &mut direction {
            *d = *d - mean;
        }

        let mut tau = S::one();
        let accepted = loop {
            let trial: Vec<S> = eval
                .heights
                .iter()
                .zip(&direction)
                .map(|(&h, &d)| h + tau * d)
                .collect();
            let candidate = Evaluation::new(&problem, trial);
            let keeps_mass = candidate
                .diagram
                .measures
                .iter()
                .zip(&floor)
                .all(|(&w, &f)| w >= f && w > S::zero());
            if keeps_mass && candidate.energy >= eval.energy - eval.rounding_slack() {
                break Some(candidate);
            }
            tau = tau * config.line_search_shrink;
            if tau < S::lit(1e-14) {
                break None;
            }
        };
        match accepted {
            Some(next) if next.heights != eval.heights => {
                report.step_sizes.push(tau);
                report.iterations += 1;
                eval = next;
            }
            _ => break,
        }
    }

    report.converged = converged;
    let heights = HeightVector::new(problem.to_original_heights(&eval.heights)).gauge_normalized();
    let diagram = eval.diagram.to_original(&problem);
    report.wall_time = start.elapsed();
    Ok(Solution {
        heights,
        diagram,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolygon, Point};

    fn square() -> SourceDensity<f64> {
        SourceDensity::uniform(ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap())
    }

    #[test]
    fn symmetric_pair_is_a_fixed_point() {
        let sites = vec![
            Site::new(Point::new(-1.0, 0.0), 0.5),
            Site::new(Point::new(1.0, 0.0), 0.5),
        ];
        let sol = newton_solve(&sites, &square(), &SolverConfig::default()).unwrap();
        assert!(sol.report.converged);
        assert!(sol.report.iterations <= 1);
        assert_eq!(sol.report.initialization, Initialization::Voronoi);
        assert!(sol.heights.0.iter().all(|h| h.abs() < 1e-15));
    }

    #[test]
    fn unequal_pair_converges() {
        let sites = vec![
            Site::new(Point::new(-1.0, 0.0), 0.2),
            Site::new(Point::new(1.0, 0.0), 0.8),
        ];
        let sol = newton_solve(&sites, &square(), &SolverConfig::default()).unwrap();
        assert!(sol.report.converged);
        // boundary at x = −0.6 means h₂ − h₁ = 1.2 (cells split where 2x = h₁ − h₂)
        assert!((sol.heights.0[1] - sol.heights.0[0] - 1.2).abs() < 1e-6);
    }

    #[test]
    fn far_sites_use_contracted_start() {
        let sites = vec![
            Site::new(Point::new(100.0, 100.0), 0.25),
            Site::new(Point::new(101.0, 100.0), 0.25),
            Site::new(Point::new(100.0, 101.0), 0.25),
            Site::new(Point::new(100.5, 100.5), 0.25),
        ];
        let sol = newton_solve(&sites, &square(), &SolverConfig::default()).unwrap();
        assert_eq!(sol.report.initialization, Initialization::ContractedVoronoi);
        assert!(sol.report.converged);
        for c in &sol.diagram.cells {
            assert!((c.measure - 0.25).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_unbalanced_masses() {
        let sites = vec![
            Site::new(Point::new(-1.0, 0.0), 0.5),
            Site::new(Point::new(1.0, 0.0), 0.6),
        ];
        assert!(matches!(
            newton_solve(&sites, &square(), &SolverConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn iteration_cap_returns_unconverged_best_iterate() {
        let sites: Vec<Site<f64>> = (0..6)
            .map(|i| Site::new(Point::new(i as f64 * 0.1, (i * i) as f64 * 0.05), 1.0 / 6.0))
            .collect();
        let cfg = SolverConfig {
            max_iterations: 1,
            tol_gradient_inf: 1e-14,
            ..SolverConfig::default()
        };
        let sol = newton_solve(&sites, &square(), &cfg).unwrap();
        assert!(!sol.report.converged);
        assert_eq!(sol.report.iterations, 1);
        assert!(sol.report.energy[1] > sol.report.energy[0]);
    }
}
