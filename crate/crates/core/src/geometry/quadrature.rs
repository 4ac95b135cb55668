//! Exact integration of quadratic polynomials over polygons.
//!
//! Polygons are fan-triangulated and each triangle is integrated with the
//! edge-midpoint rule, which is exact for polynomials of degree ≤ 2.

use crate::geometry::{ConvexPolygon, Point};
use crate::measure::SourceDensity;
use crate::scalar::Real;

/// `f(x) = c + ⟨b, x − o⟩ + ½ (x − o)ᵀ A (x − o)` with symmetric `A`.
///
/// Keeping the expansion point `o` explicit avoids cancellation when integrating
/// far from the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic<S> {
    pub origin: Point<S>,
    pub constant: S,
    pub linear: Point<S>,
    pub hessian: [[S; 2]; 2],
}

impl<S: Real> Quadratic<S> {
    pub fn constant(c: S) -> Self {
        Self {
            origin: Point::default(),
            constant: c,
            linear: Point::default(),
            hessian: [[S::zero(); 2]; 2],
        }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    /// `⟨b, x⟩ + c`.
    pub fn affine(linear: Point<S>, constant: S) -> Self {
        Self {
            linear,
            ..Self::constant(constant)
        }
    }

    /// The coordinate function `x ↦ x_axis`.
    pub fn coordinate(axis: usize) -> Self {
        let linear = if axis == 0 {
            Point::new(S::one(), S::zero())
        } else {
            Point::new(S::zero(), S::one())
        };
        Self::affine(linear, S::zero())
    }

    /// `½|x − y|²`, the quadratic transport cost to `y`.
    pub fn half_squared_distance(y: Point<S>) -> Self {
        Self {
            origin: y,
            constant: S::zero(),
            linear: Point::default(),
            hessian: [[S::one(), S::zero()], [S::zero(), S::one()]],
        }
    }

    /// `½|x|²`.
    pub fn half_norm_squared() -> Self {
        Self::half_squared_distance(Point::default())
    }

    pub fn eval(&self, x: &Point<S>) -> S {
        let d = *x - self.origin;
        let [[a, b], [c, e]] = self.hessian;
        let ad = Point::new(a * d.x + b * d.y, c * d.x + e * d.y);
        self.constant + self.linear.dot(&d) + S::lit(0.5) * d.dot(&ad)
    }
}

/// `∫_T f dx` over a triangle, exact for quadratic `f`.
pub fn integrate_triangle<S: Real>(tri: &[Point<S>; 3], f: &Quadratic<S>) -> S {
    let [a, b, c] = *tri;
    let area = S::lit(0.5) * (b - a).cross(&(c - a)).abs();
    let half = S::lit(0.5);
    let m1 = a.lerp(&b, half);
    let m2 = b.lerp(&c, half);
    let m3 = c.lerp(&a, half);
    area / S::lit(3.0) * (f.eval(&m1) + f.eval(&m2) + f.eval(&m3))
}

/// `∫_P f dx` with unit density.
pub fn integrate_polygon<S: Real>(poly: &ConvexPolygon<S>, f: &Quadratic<S>) -> S {
    poly.fan().map(|tri| integrate_triangle(&tri, f)).sum()
}

/// `∫_P f ρ dx` for a piecewise-constant source density `ρ`.
pub fn polygon_moment<S: Real>(
    poly: &ConvexPolygon<S>,
    integrand: &Quadratic<S>,
    density: &SourceDensity<S>,
) -> S {
    density.integrate(poly, integrand)
}
