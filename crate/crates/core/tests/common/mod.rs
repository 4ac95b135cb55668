#![allow(dead_code)]

use sdot::geometry::build_power_diagram;
use sdot::measure::StreamRng;
use sdot::{ConvexPolygon, Density64, Heights64, Point64, RandomSeed, Site64, SourceDensity};

pub fn square() -> Density64 {
    SourceDensity::uniform(ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap())
}

pub fn unit_square() -> Density64 {
    SourceDensity::uniform(ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap())
}

/// Flat Dirichlet weights scaled to `total`.
pub fn dirichlet(rng: &mut StreamRng, k: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.uniform_open_zero().ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|r| r * total / s).collect()
}

/// `k` sites uniform in `[lo, hi]²` with Dirichlet masses of total 1.
pub fn random_sites(seed: u64, k: usize, lo: f64, hi: f64) -> Vec<Site64> {
    let mut rng = StreamRng::new(RandomSeed(seed), 0);
    let pts: Vec<Point64> = (0..k)
        .map(|_| Point64::new(lo + (hi - lo) * rng.uniform(), lo + (hi - lo) * rng.uniform()))
        .collect();
    let masses = dirichlet(&mut rng, k, 1.0);
    pts.into_iter().zip(masses).map(|(p, m)| Site64::new(p, m)).collect()
}

/// Random sites in `[−1, 1]²` with perturbed Voronoi heights. Every cell keeps at
/// least a tenth of the average cell mass, so finite-difference stencils stay within
/// one combinatorial type of the diagram.
pub fn admissible_instance(seed: u64, k: usize) -> (Vec<Site64>, Heights64) {
    let density = square();
    for attempt in 0.. {
        let sites = random_sites(seed * 1000 + attempt, k, -1.0, 1.0);
        let mut rng = StreamRng::new(RandomSeed(seed * 1000 + attempt), 1);
        let h = Heights64::new(
            sites
                .iter()
                .map(|s| -s.position.half_norm_squared() + 0.02 * rng.standard_normal_pair().0)
                .collect(),
        );
        let diagram = build_power_diagram(&sites, &h, &density).unwrap();
        let floor = 0.1 * density.total_mass() / k as f64;
        if diagram.cells.iter().all(|c| c.measure >= floor) {
            return (sites, h);
        }
    }
    unreachable!()
}
