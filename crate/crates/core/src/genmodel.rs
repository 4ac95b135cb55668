//! Generative model: push a fixed latent distribution ζ forward onto an empirical
//! latent measure through the semi-discrete transport map, optionally followed by a
//! lookup table back to ambient space.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, Site};
use crate::measure::{RandomSeed, SourceDensity, StreamRng};
use crate::potential::{u_eval, TransportModel};
use crate::scalar::Real;
use crate::solver::{SolverConfig, SolverReport};

/// Samples generated from one random stream.
const BLOCK: usize = 4096;

/// Latent codes `z_i` and an optional decoder table `i ↦ y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentEmbedding<S> {
    latent_points: Vec<Point<S>>,
    decoder_table: Option<Vec<Point<S>>>,
}

impl<S: Real> LatentEmbedding<S> {
    pub fn new(latent_points: Vec<Point<S>>, decoder_table: Option<Vec<Point<S>>>) -> Result<Self> {
        if latent_points.is_empty() {
            return invalid("the embedding needs at least one latent point");
        }
        if latent_points.iter().any(|p| !p.is_finite()) {
            return invalid("latent points must be finite");
        }
        let mut order: Vec<usize> = (0..latent_points.len()).collect();
        order.sort_by(|&a, &b| {
            let (p, q) = (latent_points[a], latent_points[b]);
            p.x.partial_cmp(&q.x)
                .unwrap()
                .then(p.y.partial_cmp(&q.y).unwrap())
        });
        if let Some(w) = order.windows(2).find(|w| latent_points[w[0]] == latent_points[w[1]]) {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return invalid(format!("latent points {a} and {b} coincide"));
        }
        if let Some(table) = &decoder_table {
            if table.len() != latent_points.len() {
                return invalid(format!(
                    "decoder table has {} entries for {} latent points",
                    table.len(),
                    latent_points.len()
                ));
            }
        }
        Ok(Self {
            latent_points,
            decoder_table,
        })
    }

    /// Identity embedding: the data points are their own latent codes.
    pub fn identity(points: Vec<Point<S>>) -> Result<Self> {
        Self::new(points, None)
    }

    pub fn latent_points(&self) -> &[Point<S>] {
        &self.latent_points
    }

    pub fn decoder_table(&self) -> Option<&[Point<S>]> {
        self.decoder_table.as_deref()
    }

    pub fn len(&self) -> usize {
        self.latent_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latent_points.is_empty()
    }

    fn decode(&self, index: usize) -> Point<S> {
        match &self.decoder_table {
            Some(t) => t[index],
            None => self.latent_points[index],
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerativeModel<S> {
    pub embedding: LatentEmbedding<S>,
    pub zeta: SourceDensity<S>,
    pub transport: TransportModel<S>,
}

/// Solves the transport from `zeta` to the uniform measure on the latent points.
///
/// Fails with [`Error::NotConverged`] if the solver stops above tolerance.
pub fn fit<S: Real>(
    embedding: LatentEmbedding<S>,
    zeta: SourceDensity<S>,
    solver_config: &SolverConfig<S>,
) -> Result<(GenerativeModel<S>, SolverReport<S>)> {
    if (zeta.total_mass() - S::one()).abs() > S::lit(1e-12) {
        return invalid(format!("ζ must be a probability measure, has mass {}", zeta.total_mass()));
    }
    let mass = S::one() / S::from_usize_lossy(embedding.len());
    let sites: Vec<Site<S>> = embedding
        .latent_points()
        .iter()
        .map(|&p| Site::new(p, mass))
        .collect();
    let (transport, report) = TransportModel::solve(sites, zeta.clone(), solver_config)?;
    if !report.converged {
        return Err(Error::NotConverged {
            iterations: report.iterations,
            gradient_inf_norm: report.gradient_inf_norm.last().map_or(f64::NAN, |g| g.as_f64()),
        });
    }
    Ok((
        GenerativeModel {
            embedding,
            zeta,
            transport,
        },
        report,
    ))
}

impl<S: Real> GenerativeModel<S> {
    /// Target indices `T(z)` for `n` draws `z ~ ζ`. Block `b` of 4096 draws uses
    /// stream `b` of `seed`, so the result does not depend on the thread count.
    pub fn generate_indices(&self, n: usize, seed: RandomSeed) -> Vec<usize> {
        let sampler = self.zeta.sampler();
        let potential = self.transport.potential();
        let blocks = n.div_ceil(BLOCK);
        (0..blocks)
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut rng = StreamRng::new(seed, b as u64);
                let len = BLOCK.min(n - b * BLOCK);
                let sampler = &sampler;
                (0..len).map(move |_| u_eval(potential, &sampler.draw(&mut rng)).1)
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// `n` generated samples: decoded target atoms of `T(z)`, `z ~ ζ`.
    pub fn generate(&self, n: usize, seed: RandomSeed) -> Vec<Point<S>> {
        self.generate_indices(n, seed)
            .into_iter()
            .map(|i| self.embedding.decode(i))
            .collect()
    }

    /// Compares the frequency of each target index among `n` pushed-forward draws
    /// with its mass, using a 4σ binomial bound per index.
    pub fn pushforward_check(&self, n: usize, seed: RandomSeed) -> Result<PushforwardReport> {
        if n == 0 {
            return invalid("pushforward check needs at least one sample");
        }
        let k = self.embedding.len();
        let mut counts = vec![0usize; k];
        for i in self.generate_indices(n, seed) {
            counts[i] += 1;
        }
        let total: f64 = self.transport.sites().iter().map(|s| s.mass.as_f64()).sum();
        let nf = n as f64;
        let entries: Vec<IndexFrequency> = counts
            .iter()
            .zip(self.transport.sites())
            .map(|(&c, s)| {
                let mass = s.mass.as_f64() / total;
                let frequency = c as f64 / nf;
                IndexFrequency {
                    count: c,
                    frequency,
                    mass,
                    deviation: (frequency - mass).abs(),
                    bound: 4.0 * (mass * (1.0 - mass) / nf).sqrt(),
                }
            })
            .collect();
        let max_deviation = entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
        let violations = entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.deviation > e.bound)
            .map(|(i, _)| i)
            .collect();
        Ok(PushforwardReport {
            samples: n,
            entries,
            max_deviation,
            violations,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexFrequency {
    pub count: usize,
    pub frequency: f64,
    pub mass: f64,
    /// `|frequency − mass|`.
    pub deviation: f64,
    /// `4·√(mass(1 − mass)/N)`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardReport {
    pub samples: usize,
    pub entries: Vec<IndexFrequency>,
    pub max_deviation: f64,
    /// Indices whose deviation exceeds their bound.
    pub violations: Vec<usize>,
}

impl PushforwardReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}
