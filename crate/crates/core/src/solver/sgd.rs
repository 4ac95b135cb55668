//! Monte Carlo gradient ascent on the transport energy in any dimension.

use crate::error::{invalid, Result};
use crate::geometry::HeightVector;
use crate::measure::{DensitySampler, EmpiricalMeasure, RandomSeed, StreamRng};
use crate::scalar::{inf_norm, Real};

/// Source measure that can be sampled but not necessarily integrated.
pub trait SourceSampler<S> {
    fn dim(&self) -> usize;
    /// Writes one draw into `out` (length `dim()`).
    fn draw_into(&self, rng: &mut StreamRng, out: &mut [S]);
}

impl<S: Real> SourceSampler<S> for DensitySampler<S> {
    fn dim(&self) -> usize {
        2
    }

    fn draw_into(&self, rng: &mut StreamRng, out: &mut [S]) {
        let p = self.draw(rng);
        out[0] = p.x;
        out[1] = p.y;
    }
}

/// Uniform probability measure on an axis-aligned box in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBox<S> {
    lower: Vec<S>,
    upper: Vec<S>,
}

impl<S: Real> UniformBox<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return invalid("box bounds must be nonempty and of equal dimension");
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !u.is_finite() || !l.is_finite()) {
            return invalid("box bounds must be finite with lower < upper");
        }
        Ok(Self { lower, upper })
    }

    pub fn unit_cube(d: usize) -> Result<Self> {
        Self::new(vec![S::zero(); d], vec![S::one(); d])
    }
}

impl<S: Real> SourceSampler<S> for UniformBox<S> {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn draw_into(&self, rng: &mut StreamRng, out: &mut [S]) {
        for ((o, &l), &u) in out.iter_mut().zip(&self.lower).zip(&self.upper) {
            *o = l + (u - l) * S::lit(rng.uniform());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig<S> {
    pub learning_rate: S,
    pub iterations: usize,
    pub seed: RandomSeed,
}

impl<S: Real> Default for SgdConfig<S> {
    fn default() -> Self {
        Self {
            learning_rate: S::one(),
            iterations: 200,
            seed: RandomSeed(0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SgdReport<S> {
    pub iterations: usize,
    /// `‖ν − ŵ‖_∞` estimated from each iteration's batch.
    pub gradient_inf_norm: Vec<S>,
    /// Estimate at the returned heights from an independent batch.
    pub final_gradient_inf_norm: S,
}

fn estimate_masses<S: Real>(
    target: &EmpiricalMeasure<S>,
    heights: &[S],
    sampler: &impl SourceSampler<S>,
    n: usize,
    rng: &mut StreamRng,
) -> Vec<S> {
    let k = target.len();
    let mut counts = vec![0usize; k];
    let mut x = vec![S::zero(); sampler.dim()];
    for _ in 0..n {
        sampler.draw_into(rng, &mut x);
        let mut best = 0;
        let mut best_val = S::neg_infinity();
        for (i, y) in target.points().iter().enumerate() {
            let v = y.iter().zip(&x).map(|(&a, &b)| a * b).sum::<S>() + heights[i];
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        counts[best] += 1;
    }
    let total: S = target.masses().iter().copied().sum();
    let n = S::from_usize_lossy(n);
    counts
        .into_iter()
        .map(|c| total * S::from_usize_lossy(c) / n)
        .collect()
}

/// Stochastic gradient ascent `h ← h + η_t(ν − ŵ)`, `η_t = η/√(t + 1)`, with `ŵ` counted from
/// `samples_per_iteration` draws, each assigned to `argmax_i ⟨x, y_i⟩ + h_i`.
///
/// Iteration `t` draws from stream `t` of the configured seed. The returned heights
/// are the average of the iterates over the second half of the run, gauge-normalized.
pub fn sgd_solve<S: Real>(
    target: &EmpiricalMeasure<S>,
    sampler: &impl SourceSampler<S>,
    config: &SgdConfig<S>,
    samples_per_iteration: usize,
) -> Result<(HeightVector<S>, SgdReport<S>)> {
    let k = target.len();
    if target.dim() != sampler.dim() {
        return invalid(format!(
            "target lives in dimension {} but the source in {}",
            target.dim(),
            sampler.dim()
        ));
    }
    if samples_per_iteration == 0 {
        return invalid("samples_per_iteration must be positive");
    }
    if !(config.learning_rate > S::zero()) || !config.learning_rate.is_finite() {
        return invalid("learning_rate must be positive and finite");
    }
    if target.points().iter().flatten().any(|v| !v.is_finite()) {
        return invalid("target points must be finite");
    }
    let mut report = SgdReport {
        iterations: 0,
        gradient_inf_norm: Vec::new(),
        final_gradient_inf_norm: S::zero(),
    };
    if k == 1 {
        return Ok((HeightVector::zeros(1), report));
    }

    let nu = target.masses();
    let mut h = vec![S::zero(); k];
    let mut sum = vec![S::zero(); k];
    let mut averaged = 0usize;
    let burn_in = config.iterations / 2;
    for t in 0..config.iterations {
        let mut rng = StreamRng::new(config.seed, t as u64);
        let w = estimate_masses(target, &h, sampler, samples_per_iteration, &mut rng);
        let g: Vec<S> = nu.iter().zip(&w).map(|(&a, &b)| a - b).collect();
        report.gradient_inf_norm.push(inf_norm(&g));
        let step = config.learning_rate / S::from_usize_lossy(t + 1).sqrt();
        for (hi, gi) in h.iter_mut().zip(&g) {
            *hi = *hi + step * *gi;
        }
        if t >= burn_in {
            for (s, &hi) in sum.iter_mut().zip(&h) {
                *s = *s + hi;
            }
            averaged += 1;
        }
        report.iterations += 1;
    }
    if averaged > 0 {
        let n = S::from_usize_lossy(averaged);
        h = sum.into_iter().map(|s| s / n).collect();
    }
    let heights = HeightVector::new(h).gauge_normalized();
    let mut rng = StreamRng::new(config.seed, config.iterations as u64);
    let w = estimate_masses(target, heights.as_slice(), sampler, samples_per_iteration, &mut rng);
    let g: Vec<S> = nu.iter().zip(&w).map(|(&a, &b)| a - b).collect();
    report.final_gradient_inf_norm = inf_norm(&g);
    Ok((heights, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_is_trivially_converged() {
        let target = EmpiricalMeasure::uniform(vec![vec![0.3, 0.4, 0.5]]).unwrap();
        let src = UniformBox::<f64>::unit_cube(3).unwrap();
        let (h, report) = sgd_solve(&target, &src, &SgdConfig::default(), 10).unwrap();
        assert_eq!(h.0, vec![0.0]);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let target = EmpiricalMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let src = UniformBox::<f64>::unit_cube(3).unwrap();
        assert!(sgd_solve(&target, &src, &SgdConfig::default(), 10).is_err());
    }

    #[test]
    fn cube_corners_balance() {
        let target = EmpiricalMeasure::uniform(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let src = UniformBox::<f64>::unit_cube(3).unwrap();
        let cfg = SgdConfig {
            iterations: 60,
            ..SgdConfig::default()
        };
        let (_, report) = sgd_solve(&target, &src, &cfg, 100_000).unwrap();
        assert!(report.final_gradient_inf_norm <= 0.02, "{}", report.final_gradient_inf_norm);
    }

    #[test]
    fn box_draws_stay_inside() {
        let b = UniformBox::new(vec![-1.0, 2.0], vec![0.0, 5.0]).unwrap();
        let mut rng = StreamRng::new(RandomSeed(3), 0);
        let mut x = [0.0; 2];
        for _ in 0..1000 {
            b.draw_into(&mut rng, &mut x);
            assert!((-1.0..0.0).contains(&x[0]) && (2.0..5.0).contains(&x[1]));
        }
    }
}
