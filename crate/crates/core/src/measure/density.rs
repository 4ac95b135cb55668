use crate::error::{invalid, Result};
use crate::geometry::quadrature::{integrate_polygon, Quadratic};
use crate::geometry::{ConvexPolygon, Point, EPS_GEOM};
use crate::measure::rng::{RandomSeed, StreamRng};
use crate::scalar::Real;

/// One triangle of a piecewise-constant density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece<S> {
    pub triangle: ConvexPolygon<S>,
    pub density: S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind<S> {
    /// Constant density `total_mass / area(Ω)`.
    Uniform { value: S },
    /// Per-triangle constant density on a triangulation of Ω.
    Piecewise { pieces: Vec<DensityPiece<S>> },
}

/// An absolutely continuous source measure supported on a convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDensity<S> {
    domain: ConvexPolygon<S>,
    kind: DensityKind<S>,
    total_mass: S,
}

impl<S: Real> SourceDensity<S> {
    /// Uniform probability measure on `domain`.
    pub fn uniform(domain: ConvexPolygon<S>) -> Self {
        let value = S::one() / domain.area();
        Self {
            domain,
            kind: DensityKind::Uniform { value },
            total_mass: S::one(),
        }
    }

    /// Uniform measure on `domain` with the given total mass.
    pub fn uniform_with_mass(domain: ConvexPolygon<S>, total_mass: S) -> Result<Self> {
        if !(total_mass > S::zero() && total_mass.is_finite()) {
            return invalid("total mass must be positive and finite");
        }
        let value = total_mass / domain.area();
        Ok(Self {
            domain,
            kind: DensityKind::Uniform { value },
            total_mass,
        })
    }

    /// Piecewise-constant density over a triangulation that covers `domain`.
    pub fn piecewise(
        domain: ConvexPolygon<S>,
        triangles: Vec<[Point<S>; 3]>,
        densities: Vec<S>,
    ) -> Result<Self> {
        if triangles.is_empty() || triangles.len() != densities.len() {
            return invalid("piecewise density needs one density value per triangle");
        }
        let tol = S::lit(1e-9) * domain.diameter();
        let mut pieces = Vec::with_capacity(triangles.len());
        for (k, (tri, &rho)) in triangles.into_iter().zip(&densities).enumerate() {
            if !(rho > S::zero() && rho.is_finite()) {
                return invalid(format!("density of triangle {k} must be positive and finite"));
            }
            let triangle = ConvexPolygon::new(tri.to_vec())
                .map_err(|e| crate::Error::InvalidInput(format!("triangle {k}: {e}")))?;
            if triangle.vertices().iter().any(|v| !domain.contains(v, tol)) {
                return invalid(format!("triangle {k} extends outside the domain"));
            }
            pieces.push(DensityPiece {
                triangle,
                density: rho,
            });
        }
        let covered: S = pieces.iter().map(|p| p.triangle.area()).sum();
        let area = domain.area();
        if (covered - area).abs() > S::lit(1e-9) * area {
            return invalid("triangulation does not cover the domain");
        }
        for a in 0..pieces.len() {
            for b in a + 1..pieces.len() {
                if let Some(overlap) = pieces[a].triangle.intersect(&pieces[b].triangle) {
                    if overlap.area() > S::lit(1e-9) * area {
                        return invalid(format!("triangles {a} and {b} overlap"));
                    }
                }
            }
        }
        let total_mass = pieces.iter().map(|p| p.density * p.triangle.area()).sum();
        Ok(Self {
            domain,
            kind: DensityKind::Piecewise { pieces },
            total_mass,
        })
    }

    pub fn domain(&self) -> &ConvexPolygon<S> {
        &self.domain
    }

    pub fn kind(&self) -> &DensityKind<S> {
        &self.kind
    }

    pub fn total_mass(&self) -> S {
        self.total_mass
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform { .. })
    }

    /// Density value at `p` (0 outside the domain).
    pub fn density_at(&self, p: &Point<S>) -> S {
        let tol = S::lit(EPS_GEOM) * self.domain.diameter();
        match &self.kind {
            DensityKind::Uniform { value } => {
                if self.domain.contains(p, tol) {
                    *value
                } else {
                    S::zero()
                }
            }
            DensityKind::Piecewise { pieces } => pieces
                .iter()
                .find(|piece| piece.triangle.contains(p, tol))
                .map_or(S::zero(), |piece| piece.density),
        }
    }

    /// `∫_P f ρ dx` for a polygon `P ⊆ Ω`.
    pub fn integrate(&self, poly: &ConvexPolygon<S>, f: &Quadratic<S>) -> S {
        match &self.kind {
            DensityKind::Uniform { value } => *value * integrate_polygon(poly, f),
            DensityKind::Piecewise { pieces } => {
                let (lo, hi) = poly.bounding_box();
                pieces
                    .iter()
                    .filter(|piece| {
                        let (plo, phi) = piece.triangle.bounding_box();
                        plo.x <= hi.x && plo.y <= hi.y && lo.x <= phi.x && lo.y <= phi.y
                    })
                    .filter_map(|piece| {
                        poly.intersect(&piece.triangle)
                            .map(|part| piece.density * integrate_polygon(&part, f))
                    })
                    .sum()
            }
        }
    }

    /// `∫_[a,b] ρ ds` along a segment inside the domain.
    pub fn segment_measure(&self, a: &Point<S>, b: &Point<S>) -> S {
        let length = a.distance(b);
        match &self.kind {
            DensityKind::Uniform { value } => *value * length,
            DensityKind::Piecewise { pieces } => {
                // Split at every crossing with a triangle edge, then sample the
                // density at the midpoint of each piece.
                let mut cuts = vec![S::zero(), S::one()];
                let d = *b - *a;
                for piece in pieces {
                    for (p, q) in piece.triangle.edges() {
                        let e = q - p;
                        let denom = d.cross(&e);
                        if denom == S::zero() {
                            continue;
                        }
                        let t = (p - *a).cross(&e) / denom;
                        let u = (p - *a).cross(&d) / denom;
                        if t > S::zero() && t < S::one() && u >= S::zero() && u <= S::one() {
                            cuts.push(t);
                        }
                    }
                }
                cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite cut parameters"));
                cuts.windows(2)
                    .map(|w| {
                        let mid = a.lerp(b, S::lit(0.5) * (w[0] + w[1]));
                        self.density_at(&mid) * (w[1] - w[0]) * length
                    })
                    .sum()
            }
        }
    }

    /// Mass-weighted centroid of the measure.
    pub fn mass_centroid(&self) -> Point<S> {
        let mx = self.integrate(&self.domain, &Quadratic::coordinate(0));
        let my = self.integrate(&self.domain, &Quadratic::coordinate(1));
        Point::new(mx / self.total_mass, my / self.total_mass)
    }

    /// Pushes the measure through `x ↦ (x − center) / scale`, preserving masses.
    pub(crate) fn normalized(&self, center: Point<S>, scale: S) -> Self {
        let inv = S::one() / scale;
        let f = |p: Point<S>| (p - center) * inv;
        let jac = scale * scale;
        let kind = match &self.kind {
            DensityKind::Uniform { value } => DensityKind::Uniform { value: *value * jac },
            DensityKind::Piecewise { pieces } => DensityKind::Piecewise {
                pieces: pieces
                    .iter()
                    .map(|p| DensityPiece {
                        triangle: p.triangle.map(f),
                        density: p.density * jac,
                    })
                    .collect(),
            },
        };
        Self {
            domain: self.domain.map(f),
            kind,
            total_mass: self.total_mass,
        }
    }

    /// Precomputes the triangle table used for sampling.
    pub fn sampler(&self) -> DensitySampler<S> {
        let triangles: Vec<([Point<S>; 3], f64)> = match &self.kind {
            DensityKind::Uniform { .. } => self
                .domain
                .fan()
                .map(|t| (t, ConvexPolygon::from_ccw_unchecked(t.to_vec()).area().as_f64()))
                .collect(),
            DensityKind::Piecewise { pieces } => pieces
                .iter()
                .map(|p| {
                    let v = p.triangle.vertices();
                    ([v[0], v[1], v[2]], (p.density * p.triangle.area()).as_f64())
                })
                .collect(),
        };
        let mut acc = 0.0;
        let cumulative = triangles
            .iter()
            .map(|(_, m)| {
                acc += m;
                acc
            })
            .collect();
        DensitySampler {
            triangles: triangles.into_iter().map(|(t, _)| t).collect(),
            cumulative,
        }
    }
}

/// Draws i.i.d. points from a [`SourceDensity`].
#[derive(Debug, Clone)]
pub struct DensitySampler<S> {
    triangles: Vec<[Point<S>; 3]>,
    cumulative: Vec<f64>,
}

impl<S: Real> DensitySampler<S> {
    /// One draw: pick a triangle by mass, then a uniform point in it (3 uniforms).
    pub fn draw(&self, rng: &mut StreamRng) -> Point<S> {
        let total = *self.cumulative.last().expect("non-empty triangle table");
        let target = rng.uniform() * total;
        let k = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.triangles.len() - 1);
        let (mut u, mut v) = (rng.uniform(), rng.uniform());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let [a, b, c] = self.triangles[k];
        a + (b - a) * S::lit(u) + (c - a) * S::lit(v)
    }

    pub fn draw_n(&self, n: usize, seed: RandomSeed, stream: u64) -> Vec<Point<S>> {
        let mut rng = StreamRng::new(seed, stream);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }
}

/// `n` i.i.d. samples of `density / total_mass`, from stream 0 of `seed`.
pub fn sample_source<S: Real>(density: &SourceDensity<S>, n: usize, seed: RandomSeed) -> Vec<Point<S>> {
    density.sampler().draw_n(n, seed, 0)
}
