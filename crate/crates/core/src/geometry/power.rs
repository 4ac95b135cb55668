//! Power diagrams (Laguerre diagrams) restricted to a convex domain.
//!
//! Cell `i` is `{x ∈ Ω : ⟨x, y_i⟩ + h_i ≥ ⟨x, y_j⟩ + h_j ∀ j}`, i.e. the projection of
//! facet `i` of the graph of `u_h(x) = max_i ⟨x, y_i⟩ + h_i`. Each cell is obtained by
//! clipping Ω against the `k − 1` competing half-planes. Clipping runs in a frame
//! where the domain has unit diameter and the sites are centred and scaled to unit
//! radius; the cells are unchanged by that change of variables once the heights are
//! transformed accordingly.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::polygon::clip_labeled;
use crate::geometry::quadrature::Quadratic;
use crate::geometry::{validate_sites, ConvexPolygon, HeightVector, Point, Site, EPS_GEOM};
use crate::measure::SourceDensity;
use crate::scalar::Real;

/// A cell of the diagram. Empty cells are kept so indices stay aligned with sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCell<S> {
    pub site_index: usize,
    pub polygon: Option<ConvexPolygon<S>>,
    pub measure: S,
}

impl<S> PowerCell<S> {
    pub fn is_empty(&self) -> bool {
        self.polygon.is_none()
    }
}

/// An edge of the weighted Delaunay triangulation, dual to a shared cell boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEdge<S> {
    pub i: usize,
    pub j: usize,
    /// `∫ ρ ds` over the shared boundary segment.
    pub face_measure: S,
    /// `|y_i − y_j|`.
    pub site_distance: S,
    pub segment: (Point<S>, Point<S>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerDiagram<S> {
    pub cells: Vec<PowerCell<S>>,
    pub dual_edges: Vec<DualEdge<S>>,
}

impl<S: Real> PowerDiagram<S> {
    pub fn measures(&self) -> Vec<S> {
        self.cells.iter().map(|c| c.measure).collect()
    }

    pub fn total_measure(&self) -> S {
        self.cells.iter().map(|c| c.measure).sum()
    }

    pub fn empty_cells(&self) -> Vec<usize> {
        self.cells
            .iter()
            .filter(|c| c.is_empty())
            .map(|c| c.site_index)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Builds the power diagram of `sites` with heights `h`, restricted to the density's
/// domain, with cell measures and dual-edge face measures taken under `density`.
pub fn build_power_diagram<S: Real>(
    sites: &[Site<S>],
    heights: &HeightVector<S>,
    density: &SourceDensity<S>,
) -> Result<PowerDiagram<S>> {
    let problem = NormalizedProblem::new(sites, density)?;
    heights.validate(sites.len())?;
    let hn = problem.to_normalized_heights(heights.as_slice());
    Ok(problem.build(&hn).to_original(&problem))
}

/// `u*(y_i) = sup_{x∈Ω} ⟨x, y_i⟩ − u_h(x)` for every site.
///
/// Equals `−h_i` exactly for sites with a nonempty cell; for the others the supremum
/// is attained at a vertex of the diagram and is strictly below `−h_i`.
pub fn legendre_dual_values<S: Real>(
    sites: &[Site<S>],
    heights: &HeightVector<S>,
    domain: &ConvexPolygon<S>,
) -> Result<Vec<S>> {
    let density = SourceDensity::uniform(domain.clone());
    let problem = NormalizedProblem::new(sites, &density)?;
    heights.validate(sites.len())?;
    let hn = problem.to_normalized_heights(heights.as_slice());
    let diagram = problem.build(&hn);
    let vertices: Vec<Point<S>> = diagram
        .polygons
        .iter()
        .filter_map(|p| p.as_ref())
        .flat_map(|p| p.vertices().iter().copied())
        .collect();
    let st = problem.frame.scale * problem.frame.site_scale;
    let c = problem.frame.center;
    Ok((0..sites.len())
        .map(|i| {
            if diagram.polygons[i].is_some() {
                return -heights.0[i];
            }
            let yi = problem.sites[i];
            let best = vertices
                .iter()
                .map(|x| {
                    let u = problem.upper_envelope(&hn, x).0;
                    x.dot(&yi) - u
                })
                .fold(S::neg_infinity(), S::max);
            c.dot(&sites[i].position) + st * best
        })
        .collect())
}

/// Similarity frames for the domain (`x = center + scale·x̃`) and for the sites
/// (`y = site_center + site_scale·ỹ`).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame<S> {
    pub center: Point<S>,
    pub scale: S,
    pub site_center: Point<S>,
    pub site_scale: S,
}

/// A transport instance rewritten in the normalized frames.
#[derive(Debug, Clone)]
pub(crate) struct NormalizedProblem<S> {
    pub frame: Frame<S>,
    pub original_sites: Vec<Point<S>>,
    pub sites: Vec<Point<S>>,
    pub masses: Vec<S>,
    pub density: SourceDensity<S>,
    /// `∫ x̃ dμ` in the normalized frame.
    pub first_moment: Point<S>,
}

impl<S: Real> NormalizedProblem<S> {
    pub fn new(sites: &[Site<S>], density: &SourceDensity<S>) -> Result<Self> {
        validate_sites(sites)?;
        let center = density.mass_centroid();
        let scale = density.domain().diameter();
        let k = S::from_usize_lossy(sites.len());
        let site_center = sites
            .iter()
            .fold(Point::default(), |acc, s| acc + s.position)
            * (S::one() / k);
        let radius = sites
            .iter()
            .map(|s| s.position.distance(&site_center))
            .fold(S::zero(), S::max);
        let site_scale = if radius > S::zero() { radius } else { S::one() };
        let frame = Frame {
            center,
            scale,
            site_center,
            site_scale,
        };
        let inv_t = S::one() / site_scale;
        let normalized: Vec<Point<S>> = sites
            .iter()
            .map(|s| (s.position - site_center) * inv_t)
            .collect();
        let eps = S::lit(EPS_GEOM);
        for a in 0..normalized.len() {
            for b in a + 1..normalized.len() {
                if normalized[a].distance(&normalized[b]) <= eps {
                    return invalid(format!("sites {a} and {b} coincide"));
                }
            }
        }
        let density_n = density.normalized(center, scale);
        let first_moment = Point::new(
            density_n.integrate(density_n.domain(), &Quadratic::coordinate(0)),
            density_n.integrate(density_n.domain(), &Quadratic::coordinate(1)),
        );
        Ok(Self {
            frame,
            original_sites: sites.iter().map(|s| s.position).collect(),
            sites: normalized,
            masses: sites.iter().map(|s| s.mass).collect(),
            density: density_n,
            first_moment,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    /// `s·t`, the factor relating original and normalized energies.
    pub fn energy_scale(&self) -> S {
        self.frame.scale * self.frame.site_scale
    }

    /// `E(h) = s·t·Ẽ(h̃) + energy_offset()`.
    pub fn energy_offset(&self) -> S {
        let c = self.frame.center;
        let linear: S = self
            .original_sites
            .iter()
            .zip(&self.masses)
            .map(|(y, &m)| c.dot(y) * m)
            .sum();
        -linear - self.frame.scale * self.first_moment.dot(&self.frame.site_center)
    }

    pub fn to_normalized_heights(&self, h: &[S]) -> Vec<S> {
        let st = self.energy_scale();
        let c = self.frame.center;
        h.iter()
            .zip(&self.original_sites)
            .map(|(&hi, y)| (hi + c.dot(y)) / st)
            .collect()
    }

    pub fn to_original_heights(&self, hn: &[S]) -> Vec<S> {
        let st = self.energy_scale();
        let c = self.frame.center;
        hn.iter()
            .zip(&self.original_sites)
            .map(|(&hi, y)| st * hi - c.dot(y))
            .collect()
    }

    pub fn to_original_point(&self, p: &Point<S>) -> Point<S> {
        self.frame.center + *p * self.frame.scale
    }

    /// `max_i ⟨x̃, ỹ_i⟩ + h̃_i` and the lowest maximizing index.
    pub fn upper_envelope(&self, hn: &[S], x: &Point<S>) -> (S, usize) {
        let mut best = (x.dot(&self.sites[0]) + hn[0], 0);
        for (i, (y, &h)) in self.sites.iter().zip(hn).enumerate().skip(1) {
            let v = x.dot(y) + h;
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// Power diagram in the normalized frame.
    pub fn build(&self, hn: &[S]) -> NormalizedDiagram<S> {
        let k = self.len();
        let tol = S::lit(EPS_GEOM);
        let domain: Vec<(Point<S>, Label)> = self
            .density
            .domain()
            .vertices()
            .iter()
            .enumerate()
            .map(|(e, &p)| (p, Label::Domain(e)))
            .collect();

        let cells: Vec<Option<Vec<(Point<S>, Label)>>> = (0..k)
            .into_par_iter()
            .map(|i| {
                let mut poly = domain.clone();
                for j in 0..k {
                    if j == i {
                        continue;
                    }
                    let normal = self.sites[i] - self.sites[j];
                    let offset = hn[j] - hn[i];
                    match clip_labeled(&poly, normal, offset, Label::Site(j), tol) {
                        Ok(Some(p)) => poly = p,
                        Ok(None) => return None,
                        Err(_) => unreachable!("sites are validated distinct"),
                    }
                }
                Some(poly)
            })
            .collect();

        let polygons: Vec<Option<ConvexPolygon<S>>> = cells
            .iter()
            .map(|c| {
                c.as_ref().map(|ring| {
                    ConvexPolygon::from_ccw_unchecked(ring.iter().map(|(p, _)| *p).collect())
                })
            })
            .collect();
        let measures: Vec<S> = polygons
            .par_iter()
            .map(|p| {
                p.as_ref()
                    .map_or(S::zero(), |p| self.density.integrate(p, &Quadratic::one()))
            })
            .collect();

        // Shared boundaries, keyed by (low, high) and taken from the lower-index cell
        // when both sides report one.
        let mut segments: BTreeMap<(usize, usize), (Point<S>, Point<S>)> = BTreeMap::new();
        for (i, ring) in cells.iter().enumerate() {
            let Some(ring) = ring else { continue };
            let n = ring.len();
            for e in 0..n {
                if let Label::Site(j) = ring[e].1 {
                    let (p, q) = (ring[e].0, ring[(e + 1) % n].0);
                    if p.distance(&q) <= tol {
                        continue;
                    }
                    let key = (i.min(j), i.max(j));
                    if i < j || !segments.contains_key(&key) {
                        segments.insert(key, (p, q));
                    }
                }
            }
        }
        let edges = segments
            .into_iter()
            .map(|((i, j), (p, q))| NormalizedEdge {
                i,
                j,
                face_measure: self.density.segment_measure(&p, &q),
                site_distance: self.sites[i].distance(&self.sites[j]),
                segment: (p, q),
            })
            .collect();

        NormalizedDiagram {
            polygons,
            measures,
            edges,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Label {
    Domain(usize),
    Site(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct NormalizedEdge<S> {
    pub i: usize,
    pub j: usize,
    pub face_measure: S,
    pub site_distance: S,
    pub segment: (Point<S>, Point<S>),
}

/// Diagram in the normalized frame; measures are frame-independent.
#[derive(Debug, Clone)]
pub(crate) struct NormalizedDiagram<S> {
    pub polygons: Vec<Option<ConvexPolygon<S>>>,
    pub measures: Vec<S>,
    pub edges: Vec<NormalizedEdge<S>>,
}

impl<S: Real> NormalizedDiagram<S> {
    pub fn to_original(&self, problem: &NormalizedProblem<S>) -> PowerDiagram<S> {
        let s = problem.frame.scale;
        let t = problem.frame.site_scale;
        let map = |p: Point<S>| problem.to_original_point(&p);
        PowerDiagram {
            cells: self
                .polygons
                .iter()
                .zip(&self.measures)
                .enumerate()
                .map(|(i, (poly, &measure))| PowerCell {
                    site_index: i,
                    polygon: poly.as_ref().map(|p| p.map(map)),
                    measure,
                })
                .collect(),
            dual_edges: self
                .edges
                .iter()
                .map(|e| DualEdge {
                    i: e.i,
                    j: e.j,
                    face_measure: e.face_measure / s,
                    site_distance: e.site_distance * t,
                    segment: (map(e.segment.0), map(e.segment.1)),
                })
                .collect(),
        }
    }
}
