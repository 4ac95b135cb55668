//! Brenier and Kantorovich potentials, the c-transform, and the transport map.
//!
//! With `c(x, y) = ½|x − y|²` the three descriptions of the solution agree:
//! `u_h(x) = max_i ⟨x, y_i⟩ + h_i`, `φ = ½|x|² − u_h`, and the power weights
//! `ψ_i = h_i + ½|y_i|²`, for which `φ(x) = min_i ½|x − y_i|² − ψ_i`.

mod model;

pub use model::{dual_energy, transport_cost_of, TransportModel};

use crate::error::{invalid, Result};
use crate::geometry::{HeightVector, Point, Site};
use crate::scalar::Field;

/// `u_h(x) = max_i ⟨x, y_i⟩ + h_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrenierPotential<T> {
    sites: Vec<Site<T>>,
    heights: HeightVector<T>,
}

impl<T: Field> BrenierPotential<T> {
    pub fn new(sites: Vec<Site<T>>, heights: HeightVector<T>) -> Result<Self> {
        if sites.is_empty() || heights.len() != sites.len() {
            return invalid(format!(
                "need one height per site and at least one site, got {} sites and {} heights",
                sites.len(),
                heights.len()
            ));
        }
        Ok(Self { sites, heights })
    }

    pub fn sites(&self) -> &[Site<T>] {
        &self.sites
    }

    pub fn heights(&self) -> &HeightVector<T> {
        &self.heights
    }

    /// Discrete Kantorovich potential paired with these heights.
    pub fn weights(&self) -> Vec<T> {
        weights_from_heights(&self.sites, &self.heights)
    }
}

/// Value of `u_h` at `x` and the index of the maximizing plane (lowest index on ties).
pub fn u_eval<T: Field>(potential: &BrenierPotential<T>, x: &Point<T>) -> (T, usize) {
    let mut best: Option<(T, usize)> = None;
    for (i, (s, h)) in potential.sites.iter().zip(&potential.heights.0).enumerate() {
        let v = x.dot(&s.position) + h.clone();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, i));
        }
    }
    best.expect("a potential has at least one plane")
}

/// `φ(x) = ½|x|² − u_h(x)`.
pub fn kantorovich_eval<T: Field>(potential: &BrenierPotential<T>, x: &Point<T>) -> T {
    x.half_norm_squared() - u_eval(potential, x).0
}

/// `ψ^c(x) = min_j ½|x − y_j|² − ψ_j`.
pub fn c_transform_discrete<T: Field>(sites: &[Site<T>], psi: &[T], x: &Point<T>) -> T {
    sites
        .iter()
        .zip(psi)
        .map(|(s, p)| power_distance(x, s, p.clone()))
        .reduce(|a, b| if b < a { b } else { a })
        .expect("at least one site")
}

/// `pow(x, y_i) = ½|x − y_i|² − ψ_i`.
pub fn power_distance<T: Field>(x: &Point<T>, site: &Site<T>, psi: T) -> T {
    (x.clone() - site.position.clone()).half_norm_squared() - psi
}

/// Index minimizing the power distance (lowest index on ties).
pub fn power_argmin<T: Field>(sites: &[Site<T>], psi: &[T], x: &Point<T>) -> usize {
    let mut best: Option<(T, usize)> = None;
    for (i, (s, p)) in sites.iter().zip(psi).enumerate() {
        let v = power_distance(x, s, p.clone());
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, i));
        }
    }
    best.expect("at least one site").1
}

/// `ψ_i = h_i + ½|y_i|²`.
pub fn weights_from_heights<T: Field>(sites: &[Site<T>], heights: &HeightVector<T>) -> Vec<T> {
    sites
        .iter()
        .zip(&heights.0)
        .map(|(s, h)| h.clone() + s.position.half_norm_squared())
        .collect()
}

/// `h_i = ψ_i − ½|y_i|²`.
pub fn heights_from_weights<T: Field>(sites: &[Site<T>], psi: &[T]) -> HeightVector<T> {
    HeightVector::new(
        sites
            .iter()
            .zip(psi)
            .map(|(s, p)| p.clone() - s.position.half_norm_squared())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn pair(h1: f64) -> BrenierPotential<f64> {
        BrenierPotential::new(
            vec![
                Site::new(Point::new(-1.0, 0.0), 0.5),
                Site::new(Point::new(1.0, 0.0), 0.5),
            ],
            HeightVector::new(vec![0.0, h1]),
        )
        .unwrap()
    }

    #[test]
    fn two_site_evaluation() {
        let p = pair(0.5);
        let x = Point::new(0.5, 0.0);
        assert_eq!(u_eval(&p, &x), (1.0, 1));
        assert_eq!(kantorovich_eval(&p, &x), -0.875);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(u_eval(&pair(0.0), &Point::new(0.0, 0.3)).1, 0);
        let sites = pair(0.0).sites().to_vec();
        assert_eq!(power_argmin(&sites, &[0.5, 0.5], &Point::new(0.0, 0.3)), 0);
    }

    #[test]
    fn single_site_kantorovich_is_half_square() {
        let p = BrenierPotential::new(
            vec![Site::new(Point::new(0.0, 0.0), 1.0)],
            HeightVector::new(vec![0.0]),
        )
        .unwrap();
        let x = Point::new(0.3, -0.7);
        assert_eq!(kantorovich_eval(&p, &x), x.half_norm_squared());
    }

    #[test]
    fn c_transform_examples() {
        let sites = pair(0.0).sites().to_vec();
        assert_eq!(c_transform_discrete(&sites, &[0.0, 1.0], &Point::new(0.0, 0.0)), -0.5);
        let one = [Site::new(Point::new(2.0, 1.0), 1.0)];
        let x = Point::new(-1.0, 0.5);
        assert_eq!(c_transform_discrete(&one, &[0.25], &x), 4.625 - 0.25);
    }

    #[test]
    fn power_distance_examples() {
        let s = Site::new(Point::new(3.0, 4.0), 1.0);
        assert_eq!(power_distance(&s.position, &s, 0.0), 0.0);
        assert_eq!(power_distance(&Point::new(0.0, 0.0), &s, 2.0), 10.5);
        assert_eq!(weights_from_heights(&[s], &HeightVector::new(vec![2.0])), vec![14.5]);
    }

    #[test]
    fn exact_rational_round_trip_and_gauge() {
        let r = |n: i64, d: i64| Rational::new(n, d);
        let sites = vec![
            Site::new(Point::new(r(1, 3), r(-2, 7)), r(1, 2)),
            Site::new(Point::new(r(5, 4), r(3, 11)), r(1, 2)),
        ];
        let h = HeightVector::new(vec![r(1, 9), r(-4, 5)]);
        let psi = weights_from_heights(&sites, &h);
        assert_eq!(heights_from_weights(&sites, &psi), h);
        let shifted = weights_from_heights(&sites, &HeightVector::new(vec![r(1, 9) + r(2, 1), r(-4, 5) + r(2, 1)]));
        for (a, b) in psi.iter().zip(&shifted) {
            assert_eq!(*b - *a, r(2, 1));
        }
        let pot = BrenierPotential::new(sites.clone(), h).unwrap();
        let x = Point::new(r(2, 3), r(1, 5));
        assert_eq!(c_transform_discrete(&sites, &psi, &x), kantorovich_eval(&pot, &x));
        assert_eq!(u_eval(&pot, &x).0 + kantorovich_eval(&pot, &x), x.half_norm_squared());
    }
}
