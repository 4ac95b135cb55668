//! Source densities, discrete target measures and reproducible sampling.

mod density;
mod empirical;
mod mixture;
pub mod rng;

pub use density::{sample_source, DensityKind, DensityPiece, DensitySampler, SourceDensity};
pub use empirical::{measure_total, EmpiricalMeasure, TotalMass};
pub use mixture::{sample_gaussian_mixture, GaussianComponent, GaussianMixtureSpec};
pub use rng::{RandomSeed, StreamRng};
