mod common;

use common::{admissible_instance, random_sites, square, unit_square};
use proptest::prelude::*;
use sdot::measure::{sample_gaussian_mixture, GaussianMixtureSpec, StreamRng};
use sdot::potential::TransportModel;
use sdot::solver::{
    alexandrov_potential, energy, lp_oracle, newton_solve, sgd_solve, SgdConfig, UniformBox,
};
use sdot::{
    ConvexPolygon, EmpiricalMeasure, Heights64, Point64, RandomSeed, Site64, SolverConfig,
    SourceDensity,
};

#[test]
fn mixture_benchmark_cells_are_equal() {
    let atoms =
        sample_gaussian_mixture(&GaussianMixtureSpec::two_clusters(), 128, RandomSeed(3)).unwrap();
    let sites = atoms.to_sites().unwrap();
    let zeta = SourceDensity::uniform(ConvexPolygon::rectangle(1000.0, 1000.0, 3000.0, 3000.0).unwrap());
    let config = SolverConfig {
        tol_gradient_inf: 1e-11,
        ..SolverConfig::default()
    };
    let sol = newton_solve(&sites, &zeta, &config).unwrap();
    assert!(sol.report.converged);
    for c in &sol.diagram.cells {
        assert!(((c.measure - 1.0 / 128.0) * 128.0f64).abs() < 1e-6);
    }
    assert!(sol.report.energy.windows(2).all(|w| w[1] >= w[0] - 1e-13 * w[0].abs().max(1.0)));
    assert!(sol.heights.0.iter().sum::<f64>().abs() < 1e-6);
}

#[test]
fn dirichlet_instance_and_lp_oracle() {
    let sites = random_sites(42, 16, 0.0, 1.0);
    let density = unit_square();
    let (model, report) = TransportModel::solve(sites.clone(), density, &SolverConfig::default()).unwrap();
    assert!(report.converged);
    assert!(*report.gradient_inf_norm.last().unwrap() <= 1e-7);
    let g = 64;
    let h = 1.0 / g as f64;
    let grid: Vec<Vec<f64>> = (0..g * g)
        .map(|i| vec![((i / g) as f64 + 0.5) * h, ((i % g) as f64 + 0.5) * h])
        .collect();
    let source = EmpiricalMeasure::uniform(grid).unwrap();
    let target = EmpiricalMeasure::from_planar(
        &sites.iter().map(|s| s.position).collect::<Vec<_>>(),
        sites.iter().map(|s| s.mass).collect(),
    )
    .unwrap();
    let plan = lp_oracle(&source, &target, 2).unwrap();
    let diam = h * 2f64.sqrt();
    assert!((plan.cost - model.transport_cost()).abs() <= 2.0 * diam);
}

#[test]
fn sgd_matches_newton_in_the_plane() {
    let sites = {
        let mut s = random_sites(77, 8, 0.1, 0.9);
        s.iter_mut().for_each(|x| x.mass = 1.0 / 8.0);
        s
    };
    let density = unit_square();
    let newton = newton_solve(&sites, &density, &SolverConfig::default()).unwrap();
    let target = EmpiricalMeasure::from_planar(
        &sites.iter().map(|s| s.position).collect::<Vec<_>>(),
        vec![1.0 / 8.0; 8],
    )
    .unwrap();
    let cfg = SgdConfig {
        iterations: 400,
        seed: RandomSeed(5),
        ..SgdConfig::default()
    };
    let (h, report) = sgd_solve(&target, &density.sampler(), &cfg, 100_000).unwrap();
    assert!(report.final_gradient_inf_norm < 0.01, "{}", report.final_gradient_inf_norm);
    for (a, b) in h.0.iter().zip(&newton.heights.0) {
        assert!((a - b).abs() < 0.01, "{a} vs {b}");
    }
}

#[test]
fn sgd_in_three_dimensions() {
    let target = EmpiricalMeasure::uniform(vec![
        vec![0.0, 0.0, 0.0],
        vec![1.0, 1.0, 0.0],
        vec![1.0, 0.0, 1.0],
        vec![0.0, 1.0, 1.0],
    ])
    .unwrap();
    let cube = UniformBox::unit_cube(3).unwrap();
    let (_, report) = sgd_solve(&target, &cube, &SgdConfig::default(), 100_000).unwrap();
    assert!(report.final_gradient_inf_norm <= 0.02);
}

#[test]
fn newton_is_permutation_equivariant() {
    let sites = random_sites(9, 10, -0.8, 0.8);
    let perm = [4, 9, 0, 2, 7, 1, 8, 3, 6, 5];
    let permuted: Vec<Site64> = perm.iter().map(|&i| sites[i]).collect();
    let a = newton_solve(&sites, &square(), &SolverConfig::default()).unwrap();
    let b = newton_solve(&permuted, &square(), &SolverConfig::default()).unwrap();
    for (k, &i) in perm.iter().enumerate() {
        assert!((a.heights.0[i] - b.heights.0[k]).abs() < 1e-8);
    }
}

#[test]
fn iteration_limit_is_reported() {
    let sites = random_sites(13, 20, -1.0, 1.0);
    let cfg = SolverConfig {
        max_iterations: 2,
        tol_gradient_inf: 1e-15,
        ..SolverConfig::default()
    };
    let sol = newton_solve(&sites, &square(), &cfg).unwrap();
    assert!(!sol.report.converged);
    assert_eq!(sol.report.iterations, 2);
    assert_eq!(sol.report.trajectory.len(), 3);
}

fn random_heights(seed: u64, k: usize) -> Heights64 {
    let mut rng = StreamRng::new(RandomSeed(seed), 3);
    Heights64::new((0..k).map(|_| 0.5 * rng.standard_normal_pair().0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_concave_along_segments(seed in 0u64..10_000, t in 0.01f64..0.99) {
        let sites = random_sites(seed, 12, -1.0, 1.0);
        let (h, g) = (random_heights(seed, 12), random_heights(seed + 1, 12));
        let mix = Heights64::new(h.0.iter().zip(&g.0).map(|(a, b)| t * a + (1.0 - t) * b).collect());
        let d = square();
        let e = |x: &Heights64| energy(&sites, x, &d).unwrap();
        prop_assert!(e(&mix) >= t * e(&h) + (1.0 - t) * e(&g) - 1e-10);
        let a = |x: &Heights64| alexandrov_potential(&sites, x, &d).unwrap();
        let half = Heights64::new(h.0.iter().zip(&g.0).map(|(a, b)| 0.5 * a + 0.5 * b).collect());
        prop_assert!(a(&half) <= 0.5 * a(&h) + 0.5 * a(&g) + 1e-10);
    }

    #[test]
    fn newton_energy_trace_is_monotone(seed in 0u64..10_000) {
        let sites = random_sites(seed, 24, -1.0, 1.0);
        let sol = newton_solve(&sites, &square(), &SolverConfig::default()).unwrap();
        prop_assert!(sol.report.converged);
        prop_assert!(sol.report.energy.windows(2).all(|w| w[1] >= w[0] - 1e-13 * w[0].abs().max(1.0)));
        prop_assert!(sol.diagram.cells.iter().all(|c| c.measure > 0.0));
    }

    #[test]
    fn gradient_sums_to_zero(seed in 0u64..10_000) {
        let (sites, h) = admissible_instance(seed, 16);
        let g = sdot::solver::gradient(&sites, &h, &square()).unwrap();
        prop_assert!(g.iter().sum::<f64>().abs() < 1e-12);
    }
}

#[test]
fn single_site_energy_is_zero_and_solution_trivial() {
    let sites = vec![Site64::new(Point64::new(0.0, 0.0), 1.0)];
    let sol = newton_solve(&sites, &square(), &SolverConfig::default()).unwrap();
    assert!(sol.report.converged);
    assert_eq!(sol.heights.0, vec![0.0]);
}
