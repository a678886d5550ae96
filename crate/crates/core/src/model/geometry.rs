use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lowest admissible altitude relative to the takeoff plane, meters.
pub const MIN_ALTITUDE_M: f64 = -0.5;

/// Point in the local east-north-up frame, meters.
///
/// `z` is height above the takeoff point, not above mean sea level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> GeoPoint<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// Builds a point and checks the coordinate invariants.
    pub fn try_new(x: T, y: T, z: T) -> Result<Self> {
        let p = Self { x, y, z };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(Error::InvalidInput(format!(
                "point ({x}, {y}, {z}) must be finite with z >= {MIN_ALTITUDE_M}"
            )))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.z >= T::lit(MIN_ALTITUDE_M)
    }

    pub fn horizontal(&self) -> [T; 2] {
        [self.x, self.y]
    }

    pub fn horizontal_distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translate(&self, dx: T, dy: T, dz: T) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }
}

/// Euclidean distance between two points.
pub fn distance_3d<T: Scalar>(p: &GeoPoint<T>, q: &GeoPoint<T>) -> T {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Distance from `p` to segment `a`-`b` in the plane, with the clamped
/// segment parameter of the closest point (0 at `a`, 1 at `b`).
pub fn point_segment_distance_2d<T: Scalar>(p: [T; 2], a: [T; 2], b: [T; 2]) -> (T, T) {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > T::zero() {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let cx = a[0] + t * ab[0];
    let cy = a[1] + t * ab[1];
    ((p[0] - cx).hypot(p[1] - cy), t)
}

/// Signed area orientation of the triangle (a, b, c).
fn orient<T: Scalar>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment<T: Scalar>(a: [T; 2], b: [T; 2], p: [T; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Closed-segment intersection test in the plane.
pub fn segments_intersect<T: Scalar>(p1: [T; 2], p2: [T; 2], q1: [T; 2], q2: [T; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let zero = T::zero();
    if ((d1 > zero && d2 < zero) || (d1 < zero && d2 > zero)) && ((d3 > zero && d4 < zero) || (d3 < zero && d4 > zero)) {
        return true;
    }
    (d1 == zero && on_segment(q1, q2, p1))
        || (d2 == zero && on_segment(q1, q2, p2))
        || (d3 == zero && on_segment(p1, p2, q1))
        || (d4 == zero && on_segment(p1, p2, q2))
}

/// Axis-aligned rectangle in the local horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn is_valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Strict interior test; points on the boundary are outside.
    pub fn contains_strict(&self, x: T, y: T) -> bool {
        x > self.x_min && x < self.x_max && y > self.y_min && y < self.y_max
    }

    pub fn corners(&self) -> [[T; 2]; 4] {
        [
            [self.x_min, self.y_min],
            [self.x_max, self.y_min],
            [self.x_max, self.y_max],
            [self.x_min, self.y_max],
        ]
    }

    pub fn center(&self) -> [T; 2] {
        let two = T::lit(2.0);
        [(self.x_min + self.x_max) / two, (self.y_min + self.y_max) / two]
    }

    /// Whether the closed segment `a`-`b` touches the rectangle interior or boundary.
    pub fn intersects_segment(&self, a: [T; 2], b: [T; 2]) -> bool {
        if self.contains(a[0], a[1]) || self.contains(b[0], b[1]) {
            return true;
        }
        let c = self.corners();
        (0..4).any(|i| segments_intersect(a, b, c[i], c[(i + 1) % 4]))
    }
}

/// Closed interval `[from, to]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span<T> {
    pub from: T,
    pub to: T,
}

impl<T: Scalar> Span<T> {
    pub fn new(from: T, to: T) -> Self {
        Self { from, to }
    }

    pub fn contains(&self, v: T) -> bool {
        v >= self.from && v <= self.to
    }

    pub fn is_valid(&self) -> bool {
        self.from.is_finite() && self.to.is_finite() && self.from <= self.to
    }

    pub fn width(&self) -> T {
        self.to - self.from
    }
}
