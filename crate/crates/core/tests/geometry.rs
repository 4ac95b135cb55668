mod common;

use common::{admissible_instance, random_sites, square};
use proptest::prelude::*;
use sdot::geometry::{
    build_power_diagram, half_plane_clip, legendre_dual_values, polygon_moment, Quadratic,
};
use sdot::measure::StreamRng;
use sdot::{ConvexPolygon, Heights64, Point64, RandomSeed, Site64, SourceDensity};

#[test]
fn clip_square_at_half() {
    let sq = ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap();
    let clipped = half_plane_clip(&sq, Point64::new(1.0, 0.0), 0.5).unwrap().unwrap();
    assert!((clipped.area() - 1.0).abs() < 1e-15);
    // Monte Carlo point-in-region count against the analytic area.
    let mut rng = StreamRng::new(RandomSeed(4), 0);
    let n = 200_000;
    let hits = (0..n)
        .filter(|_| {
            let p = Point64::new(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
            clipped.contains(&p, 0.0)
        })
        .count();
    let frac = hits as f64 / n as f64;
    assert!((frac - 0.25).abs() < 4.0 * (0.25 * 0.75 / n as f64).sqrt());
}

#[test]
fn two_site_diagram_against_monte_carlo() {
    let density = square();
    let sites = vec![
        Site64::new(Point64::new(-1.0, 0.0), 0.5),
        Site64::new(Point64::new(1.0, 0.0), 0.5),
    ];
    let h = Heights64::new(vec![0.0, 0.5]);
    let d = build_power_diagram(&sites, &h, &density).unwrap();
    let sampler = density.sampler();
    let mut rng = StreamRng::new(RandomSeed(8), 0);
    let n = 1_000_000;
    let left = (0..n).filter(|_| sampler.draw(&mut rng).x < -0.25).count() as f64 / n as f64;
    assert!((left - d.cells[0].measure).abs() < 4.0 * (0.375 * 0.625 / n as f64).sqrt());
    assert_eq!(d.dual_edges.len(), 1);
    assert!((d.dual_edges[0].face_measure - 0.5).abs() < 1e-15);
}

#[test]
fn moments_against_monte_carlo() {
    let density = square();
    let sq = density.domain().clone();
    let exact = polygon_moment(&sq, &Quadratic::half_squared_distance(Point64::new(0.0, 0.0)), &density);
    assert!((exact - 1.0 / 3.0).abs() < 1e-15);
    let sampler = density.sampler();
    let mut rng = StreamRng::new(RandomSeed(12), 0);
    let n = 200_000;
    let vals: Vec<f64> = (0..n).map(|_| sampler.draw(&mut rng).half_norm_squared()).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * sd / (n as f64).sqrt());
}

#[test]
fn legendre_values_against_grid_maximization() {
    let domain = ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap();
    let sites = vec![
        Site64::new(Point64::new(-1.0, 0.0), 0.5),
        Site64::new(Point64::new(1.0, 0.0), 0.5),
        Site64::new(Point64::new(0.0, 0.1), 0.0001),
    ];
    // The third plane lies strictly below the others on Ω.
    let h = Heights64::new(vec![0.0, 0.5, -2.0]);
    let vals = legendre_dual_values(&sites, &h, &domain).unwrap();
    assert_eq!(vals[0], 0.0);
    assert_eq!(vals[1], -0.5);
    assert!(vals[2] < 2.0);
    let g = 400;
    let mut best = f64::NEG_INFINITY;
    for a in 0..=g {
        for b in 0..=g {
            let x = Point64::new(-1.0 + 2.0 * a as f64 / g as f64, -1.0 + 2.0 * b as f64 / g as f64);
            let u = sites
                .iter()
                .zip(&h.0)
                .map(|(s, hi)| x.dot(&s.position) + hi)
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.max(x.dot(&sites[2].position) - u);
        }
    }
    assert!((vals[2] - best).abs() < 1e-9, "{} vs {best}", vals[2]);
}

#[test]
fn doubly_dual_reproduces_potential() {
    let (sites, h) = admissible_instance(3, 12);
    let domain = square().domain().clone();
    let star = legendre_dual_values(&sites, &h, &domain).unwrap();
    let d = build_power_diagram(&sites, &h, &square()).unwrap();
    for c in &d.cells {
        let x = c.polygon.as_ref().unwrap().centroid();
        let u = sites
            .iter()
            .zip(&h.0)
            .map(|(s, hi)| x.dot(&s.position) + hi)
            .fold(f64::NEG_INFINITY, f64::max);
        let u2 = sites
            .iter()
            .zip(&star)
            .map(|(s, st)| x.dot(&s.position) - st)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((u - u2).abs() < 1e-10);
    }
}

#[test]
fn disk_domain_two_sites() {
    let disk = ConvexPolygon::regular(Point64::new(0.0, 0.0), 1.0, 256).unwrap();
    let density = SourceDensity::uniform(disk);
    let sites = vec![
        Site64::new(Point64::new(0.0, -1.0), 0.5),
        Site64::new(Point64::new(0.0, 1.0), 0.5),
    ];
    let d = build_power_diagram(&sites, &Heights64::zeros(2), &density).unwrap();
    assert!((d.cells[0].measure - 0.5).abs() < 1e-12);
    assert!((d.dual_edges[0].face_measure - d.cells[0].polygon.as_ref().unwrap().diameter() / density.domain().area()).abs() < 1e-3);
}

fn nearest(sites: &[Site64], x: &Point64) -> usize {
    let mut best = 0;
    for (i, s) in sites.iter().enumerate() {
        if (*x - s.position).norm_squared() < (*x - sites[best].position).norm_squared() {
            best = i;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cells_partition_the_domain(seed in 0u64..10_000, k in 1usize..=64) {
        let sites = random_sites(seed, k, -1.5, 1.5);
        let mut rng = StreamRng::new(RandomSeed(seed), 9);
        let h = Heights64::new((0..k).map(|_| 0.3 * rng.standard_normal_pair().0).collect());
        let d = build_power_diagram(&sites, &h, &square()).unwrap();
        prop_assert!((d.total_measure() - 1.0).abs() < 1e-9);
        for c in &d.cells {
            prop_assert_eq!(c.polygon.is_none(), c.measure == 0.0);
        }
        for e in &d.dual_edges {
            prop_assert!(e.face_measure > 0.0 && e.site_distance > 0.0);
            let seg = e.segment.1 - e.segment.0;
            prop_assert!((e.face_measure - seg.norm() / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn raising_a_height_never_shrinks_its_cell(seed in 0u64..10_000, delta in 1e-3f64..0.5) {
        let (sites, h) = admissible_instance(seed, 10);
        let i = (seed % 10) as usize;
        let before = build_power_diagram(&sites, &h, &square()).unwrap().cells[i].measure;
        let mut h2 = h.clone();
        h2.0[i] += delta;
        let after = build_power_diagram(&sites, &h2, &square()).unwrap().cells[i].measure;
        prop_assert!(after >= before - 1e-15);
    }

    #[test]
    fn voronoi_heights_give_nearest_site_cells(seed in 0u64..10_000) {
        let sites = random_sites(seed, 9, -1.0, 1.0);
        let h = Heights64::new(sites.iter().map(|s| -s.position.half_norm_squared()).collect());
        let d = build_power_diagram(&sites, &h, &square()).unwrap();
        for a in 0..20 {
            for b in 0..20 {
                let x = Point64::new(-0.975 + 0.1 * a as f64, -0.975 + 0.1 * b as f64);
                let i = nearest(&sites, &x);
                let inside = d.cells[i].polygon.as_ref().is_some_and(|p| p.contains(&x, 1e-12));
                prop_assert!(inside);
            }
        }
    }

    #[test]
    fn site_order_does_not_change_cells(seed in 0u64..10_000) {
        let (sites, h) = admissible_instance(seed, 8);
        let perm: Vec<usize> = vec![3, 7, 0, 5, 1, 6, 2, 4];
        let ps: Vec<Site64> = perm.iter().map(|&i| sites[i]).collect();
        let ph = Heights64::new(perm.iter().map(|&i| h.0[i]).collect());
        let a = build_power_diagram(&sites, &h, &square()).unwrap();
        let b = build_power_diagram(&ps, &ph, &square()).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            let (pa, pb) = (a.cells[i].polygon.as_ref().unwrap(), b.cells[k].polygon.as_ref().unwrap());
            prop_assert_eq!(pa.len(), pb.len());
            let start = pb.vertices().iter().position(|v| (*v - pa.vertices()[0]).norm() < 1e-12);
            prop_assert!(start.is_some());
            let s = start.unwrap();
            for (t, v) in pa.vertices().iter().enumerate() {
                prop_assert!((*v - pb.vertices()[(s + t) % pb.len()]).norm() < 1e-12);
            }
        }
    }
}
