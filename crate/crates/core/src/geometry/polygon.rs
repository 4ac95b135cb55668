use crate::error::{invalid, Error, Result};
use crate::geometry::{Point, EPS_GEOM};
use crate::scalar::Real;

/// A convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon<S> {
    vertices: Vec<Point<S>>,
}

impl<S: Real> ConvexPolygon<S> {
    /// Validates and builds a convex polygon. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point<S>>) -> Result<Self> {
        if vertices.len() < 3 {
            return invalid(format!("polygon needs at least 3 vertices, got {}", vertices.len()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return invalid("polygon has non-finite coordinates");
        }
        let diam = diameter_of(&vertices);
        let tol = S::lit(EPS_GEOM) * diam;
        let n = vertices.len();
        for k in 0..n {
            if vertices[k].distance(&vertices[(k + 1) % n]) <= tol {
                return invalid(format!("polygon has repeated vertex at index {}", (k + 1) % n));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() <= tol * diam {
            return invalid("polygon has zero area");
        }
        if area < S::zero() {
            vertices.reverse();
        }
        // Every vertex must lie left of every edge; this also rejects star polygons.
        for k in 0..n {
            let a = vertices[k];
            let e = vertices[(k + 1) % n] - a;
            for v in &vertices {
                if e.cross(&(*v - a)) < -tol * e.norm() {
                    return invalid("polygon is not convex");
                }
            }
        }
        Ok(Self { vertices })
    }

    /// Wraps vertices already known to form a CCW convex polygon.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point<S>>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Self { vertices }
    }

    /// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
    pub fn rectangle(xmin: S, ymin: S, xmax: S, ymax: S) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax) {
            return invalid("rectangle bounds must satisfy min < max");
        }
        Self::new(vec![
            Point::new(xmin, ymin),
            Point::new(xmax, ymin),
            Point::new(xmax, ymax),
            Point::new(xmin, ymax),
        ])
    }

    /// Regular polygon inscribed in the circle of the given center and radius.
    pub fn regular(center: Point<S>, radius: S, segments: usize) -> Result<Self> {
        if segments < 3 {
            return invalid("a polygonized disk needs at least 3 segments");
        }
        if !(radius > S::zero()) {
            return invalid("disk radius must be positive");
        }
        let step = 2.0 * std::f64::consts::PI / segments as f64;
        let r = radius.as_f64();
        let vertices = (0..segments)
            .map(|k| {
                let a = step * k as f64;
                center + Point::new(S::lit(r * a.cos()), S::lit(r * a.sin()))
            })
            .collect();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Point<S>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point<S>, Point<S>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    pub fn area(&self) -> S {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point<S> {
        let o = self.vertices[0];
        let mut acc = Point::new(S::zero(), S::zero());
        let mut area = S::zero();
        for k in 1..self.vertices.len() - 1 {
            let a = self.vertices[k] - o;
            let b = self.vertices[k + 1] - o;
            let t = a.cross(&b);
            area = area + t;
            acc = acc + (a + b) * t;
        }
        o + acc * (S::one() / (S::lit(3.0) * area))
    }

    pub fn diameter(&self) -> S {
        diameter_of(&self.vertices)
    }

    /// Lower-left and upper-right corners of the bounding box.
    pub fn bounding_box(&self) -> (Point<S>, Point<S>) {
        let mut lo = self.vertices[0];
        let mut hi = lo;
        for v in &self.vertices[1..] {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    /// Containment test with absolute tolerance `tol` on the distance to each edge.
    pub fn contains(&self, p: &Point<S>, tol: S) -> bool {
        self.edges().all(|(a, b)| {
            let e = b - a;
            e.cross(&(*p - a)) >= -tol * e.norm()
        })
    }

    /// Largest `r` such that the disk of radius `r` around `p` lies in the polygon
    /// (negative when `p` is outside).
    pub fn inner_distance(&self, p: &Point<S>) -> S {
        self.edges()
            .map(|(a, b)| {
                let e = b - a;
                e.cross(&(*p - a)) / e.norm()
            })
            .fold(S::infinity(), S::min)
    }

    /// Fan triangulation from vertex 0.
    pub fn fan(&self) -> impl Iterator<Item = [Point<S>; 3]> + '_ {
        let o = self.vertices[0];
        (1..self.vertices.len() - 1).map(move |k| [o, self.vertices[k], self.vertices[k + 1]])
    }

    /// Applies an orientation-preserving similarity or translation to every vertex.
    pub(crate) fn map(&self, f: impl Fn(Point<S>) -> Point<S>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Intersection with another convex polygon; `None` when it has no area.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let mut current = self.clone();
        for (a, b) in other.edges() {
            let e = b - a;
            let normal = Point::new(-e.y, e.x);
            current = half_plane_clip(&current, normal, normal.dot(&a)).ok()??;
        }
        Some(current)
    }

    /// Intersection with `{x : ⟨normal, x⟩ ≥ offset}`; `None` when empty.
    pub fn clip(&self, normal: Point<S>, offset: S) -> Result<Option<Self>> {
        half_plane_clip(self, normal, offset)
    }
}

/// Intersects `poly` with the half-plane `{x : ⟨normal, x⟩ ≥ offset}`.
///
/// The result is convex and counterclockwise; `None` means the intersection has no
/// area.
pub fn half_plane_clip<S: Real>(
    poly: &ConvexPolygon<S>,
    normal: Point<S>,
    offset: S,
) -> Result<Option<ConvexPolygon<S>>> {
    let labeled: Vec<(Point<S>, ())> = poly.vertices.iter().map(|&p| (p, ())).collect();
    let tol = S::lit(EPS_GEOM) * poly.diameter();
    let out = clip_labeled(&labeled, normal, offset, (), tol)?;
    Ok(out.map(|v| ConvexPolygon::from_ccw_unchecked(v.into_iter().map(|(p, _)| p).collect())))
}

/// Sutherland–Hodgman step on a convex polygon whose edges carry labels.
///
/// Entry `k` labels the edge from vertex `k` to vertex `k + 1`. The edge created on
/// the clip line receives `new_label`. `tol` is an absolute distance tolerance.
pub(crate) fn clip_labeled<S: Real, L: Copy>(
    poly: &[(Point<S>, L)],
    normal: Point<S>,
    offset: S,
    new_label: L,
    tol: S,
) -> Result<Option<Vec<(Point<S>, L)>>> {
    let norm = normal.norm();
    if !(norm >= S::lit(EPS_GEOM)) {
        return Err(Error::InvalidInput(
            "degenerate half-plane normal".to_string(),
        ));
    }
    let n = poly.len();
    let dist: Vec<S> = poly
        .iter()
        .map(|(p, _)| (normal.dot(p) - offset) / norm)
        .collect();
    if dist.iter().all(|&d| d >= -tol) {
        return Ok(Some(poly.to_vec()));
    }
    if dist.iter().all(|&d| d < -tol) {
        return Ok(None);
    }
    let mut out: Vec<(Point<S>, L)> = Vec::with_capacity(n + 1);
    for k in 0..n {
        let next = (k + 1) % n;
        let (p, label) = poly[k];
        let q = poly[next].0;
        let (dp, dq) = (dist[k], dist[next]);
        let p_in = dp >= -tol;
        let q_in = dq >= -tol;
        match (p_in, q_in) {
            (true, true) => out.push((p, label)),
            (true, false) => {
                out.push((p, label));
                let t = (dp / (dp - dq)).max(S::zero()).min(S::one());
                out.push((p.lerp(&q, t), new_label));
            }
            (false, true) => {
                let t = (dp / (dp - dq)).max(S::zero()).min(S::one());
                out.push((p.lerp(&q, t), label));
            }
            (false, false) => {}
        }
    }
    Ok(dedup_ring(out, tol))
}

/// Removes near-coincident consecutive vertices, keeping the later vertex's label
/// (which describes the outgoing edge). Returns `None` for degenerate rings.
fn dedup_ring<S: Real, L: Copy>(ring: Vec<(Point<S>, L)>, tol: S) -> Option<Vec<(Point<S>, L)>> {
    let mut out: Vec<(Point<S>, L)> = Vec::with_capacity(ring.len());
    for item in ring {
        if let Some(last) = out.last() {
            if last.0.distance(&item.0) <= tol {
                out.pop();
            }
        }
        out.push(item);
    }
    while out.len() > 1 && out[0].0.distance(&out[out.len() - 1].0) <= tol {
        // the first vertex starts the surviving outgoing edge; drop the last one
        out.pop();
    }
    if out.len() < 3 {
        return None;
    }
    let pts: Vec<Point<S>> = out.iter().map(|(p, _)| *p).collect();
    if signed_area(&pts) <= tol * tol {
        return None;
    }
    Some(out)
}

pub(crate) fn signed_area<S: Real>(vertices: &[Point<S>]) -> S {
    let o = vertices[0];
    let mut twice = S::zero();
    for k in 1..vertices.len() - 1 {
        twice = twice + (vertices[k] - o).cross(&(vertices[k + 1] - o));
    }
    twice * S::lit(0.5)
}

fn diameter_of<S: Real>(vertices: &[Point<S>]) -> S {
    let mut d = S::zero();
    for (k, a) in vertices.iter().enumerate() {
        for b in &vertices[k + 1..] {
            d = d.max(a.distance(b));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(a: f64, b: f64) -> ConvexPolygon<f64> {
        ConvexPolygon::rectangle(a, a, b, b).unwrap()
    }

    #[test]
    fn clip_containing_half_plane_is_identity() {
        let sq = square(0.0, 1.0);
        let out = sq.clip(Point::new(1.0, 0.0), -1.0).unwrap().unwrap();
        assert_eq!(out, sq);
    }

    #[test]
    fn clip_disjoint_half_plane_is_empty() {
        let sq = square(0.0, 1.0);
        assert!(sq.clip(Point::new(1.0, 0.0), 2.0).unwrap().is_none());
    }

    #[test]
    fn clip_square_at_half() {
        let sq = square(-1.0, 1.0);
        let out = sq.clip(Point::new(1.0, 0.0), 0.5).unwrap().unwrap();
        assert!((out.area() - 1.0).abs() < 1e-15);
        for v in out.vertices() {
            assert!(v.x >= 0.5 - 1e-15 && v.x <= 1.0 && v.y.abs() <= 1.0);
        }
        assert!(out.area() > 0.0, "stays counterclockwise");
    }

    #[test]
    fn clip_rejects_degenerate_normal() {
        let sq = square(0.0, 1.0);
        assert!(matches!(
            sq.clip(Point::new(0.0, 1e-14), 0.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn clip_through_vertex_keeps_triangle() {
        let sq = square(0.0, 1.0);
        // diagonal through (0,0) and (1,1)
        let out = sq.clip(Point::new(1.0, -1.0), 0.0).unwrap().unwrap();
        assert_eq!(out.len(), 3);
        assert!((out.area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn new_reorients_clockwise_input() {
        let p = ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn new_rejects_nonconvex_and_degenerate() {
        let dart = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.3),
            Point::new(1.0, 2.0),
        ];
        assert!(ConvexPolygon::new(dart).is_err());
        let line = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(ConvexPolygon::new(line).is_err());
        let repeated = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(ConvexPolygon::new(repeated).is_err());
    }

    #[test]
    fn rejects_pentagram() {
        let star: Vec<Point<f64>> = (0..5)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (2 * k) as f64 / 5.0;
                Point::new(a.cos(), a.sin())
            })
            .collect();
        assert!(ConvexPolygon::new(star).is_err());
    }

    #[test]
    fn centroid_and_contains() {
        let sq = square(0.0, 2.0);
        let c = sq.centroid();
        assert!((c.x - 1.0).abs() < 1e-15 && (c.y - 1.0).abs() < 1e-15);
        assert!(sq.contains(&Point::new(2.0, 1.0), 1e-12));
        assert!(!sq.contains(&Point::new(2.1, 1.0), 1e-12));
        assert!((sq.inner_distance(&c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regular_polygon_area_approaches_disk() {
        let d = ConvexPolygon::<f64>::regular(Point::new(0.0, 0.0), 1.0, 256).unwrap();
        let exact = 0.5 * 256.0 * (2.0 * std::f64::consts::PI / 256.0).sin();
        assert!((d.area() - exact).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let sq = ConvexPolygon::<f32>::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap();
        let out = sq.clip(Point::new(1.0, 0.0), 0.5).unwrap().unwrap();
        assert!((out.area() - 1.0).abs() < 1e-6);
    }
}
