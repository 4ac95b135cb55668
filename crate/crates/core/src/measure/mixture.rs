use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::measure::rng::{RandomSeed, StreamRng};
use crate::measure::EmpiricalMeasure;
use crate::scalar::Real;

/// One isotropic Gaussian component `weight · N(center, sigma² I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent<S> {
    pub center: Point<S>,
    pub sigma: S,
    pub weight: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureSpec<S> {
    components: Vec<GaussianComponent<S>>,
}

impl<S: Real> GaussianMixtureSpec<S> {
    pub fn new(components: Vec<GaussianComponent<S>>) -> Result<Self> {
        if components.is_empty() {
            return invalid("mixture needs at least one component");
        }
        for (k, c) in components.iter().enumerate() {
            if !(c.sigma > S::zero()) || !c.center.is_finite() || !c.sigma.is_finite() {
                return invalid(format!("component {k}: sigma must be positive and finite"));
            }
            if !(c.weight >= S::zero()) {
                return invalid(format!("component {k}: weight must be non-negative"));
            }
        }
        let total: S = components.iter().map(|c| c.weight).sum();
        if (total - S::one()).abs() > S::lit(1e-12).max(S::epsilon() * S::lit(8.0)) {
            return invalid("mixture weights must sum to 1");
        }
        Ok(Self { components })
    }

    /// The two-cluster benchmark: `N((0,0), 3²)` and `N((40,40), 3²)` with equal weights.
    pub fn two_clusters() -> Self {
        let half = S::lit(0.5);
        let sigma = S::lit(3.0);
        Self::new(vec![
            GaussianComponent {
                center: Point::new(S::zero(), S::zero()),
                sigma,
                weight: half,
            },
            GaussianComponent {
                center: Point::new(S::lit(40.0), S::lit(40.0)),
                sigma,
                weight: half,
            },
        ])
        .expect("valid built-in mixture")
    }

    pub fn components(&self) -> &[GaussianComponent<S>] {
        &self.components
    }

    /// Draws one point, returning it with its component index.
    pub fn draw(&self, rng: &mut StreamRng) -> (Point<S>, usize) {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, c) in self.components.iter().enumerate() {
            if c.weight > S::zero() {
                acc += c.weight.as_f64();
                chosen = Some(k);
                if u < acc {
                    break;
                }
            }
        }
        let k = chosen.expect("at least one positive weight");
        let c = &self.components[k];
        let (gx, gy) = rng.standard_normal_pair();
        let p = c.center + Point::new(S::lit(gx), S::lit(gy)) * c.sigma;
        (p, k)
    }
}

/// `n` atoms of mass `1/n` drawn from the mixture.
pub fn sample_gaussian_mixture<S: Real>(
    spec: &GaussianMixtureSpec<S>,
    n: usize,
    seed: RandomSeed,
) -> Result<EmpiricalMeasure<S>> {
    if n == 0 {
        return invalid("sample count must be at least 1");
    }
    let mut rng = StreamRng::new(seed, 0);
    let points: Vec<Vec<S>> = (0..n)
        .map(|_| {
            let (p, _) = spec.draw(&mut rng);
            vec![p.x, p.y]
        })
        .collect();
    EmpiricalMeasure::uniform(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_has_128_equal_atoms() {
        let m = sample_gaussian_mixture(&GaussianMixtureSpec::<f64>::two_clusters(), 128, RandomSeed(0)).unwrap();
        assert_eq!(m.len(), 128);
        assert!(m.masses().iter().all(|&w| w == 1.0 / 128.0));
        assert!(m.points().iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn single_component_mean() {
        let spec = GaussianMixtureSpec::new(vec![GaussianComponent {
            center: Point::new(5.0, -2.0),
            sigma: 2.0,
            weight: 1.0,
        }])
        .unwrap();
        let n = 20_000;
        let m = sample_gaussian_mixture(&spec, n, RandomSeed(9)).unwrap();
        let mx = m.points().iter().map(|p| p[0]).sum::<f64>() / n as f64;
        let my = m.points().iter().map(|p| p[1]).sum::<f64>() / n as f64;
        let bound = 3.0 * 2.0 / (n as f64).sqrt();
        assert!((mx - 5.0).abs() < bound && (my + 2.0).abs() < bound);
    }

    #[test]
    fn zero_weight_component_never_drawn() {
        let spec = GaussianMixtureSpec::new(vec![
            GaussianComponent {
                center: Point::new(0.0, 0.0),
                sigma: 1.0,
                weight: 1.0,
            },
            GaussianComponent {
                center: Point::new(100.0, 100.0),
                sigma: 1.0,
                weight: 0.0,
            },
        ])
        .unwrap();
        let mut rng = StreamRng::new(RandomSeed(4), 0);
        assert!((0..5000).all(|_| spec.draw(&mut rng).1 == 0));
    }

    #[test]
    fn component_frequencies_match_weights() {
        let spec = GaussianMixtureSpec::new(vec![
            GaussianComponent {
                center: Point::new(0.0, 0.0),
                sigma: 1.0,
                weight: 0.3,
            },
            GaussianComponent {
                center: Point::new(10.0, 0.0),
                sigma: 1.0,
                weight: 0.7,
            },
        ])
        .unwrap();
        let n = 100_000;
        let mut rng = StreamRng::new(RandomSeed(12), 0);
        let first = (0..n).filter(|_| spec.draw(&mut rng).1 == 0).count() as f64 / n as f64;
        let sd = (0.3f64 * 0.7 / n as f64).sqrt();
        assert!((first - 0.3).abs() < 4.0 * sd, "{first}");
    }

    #[test]
    fn rejects_unnormalized_weights() {
        let c = GaussianComponent {
            center: Point::new(0.0, 0.0),
            sigma: 1.0,
            weight: 0.6,
        };
        assert!(GaussianMixtureSpec::new(vec![c, c]).is_err());
    }
}
