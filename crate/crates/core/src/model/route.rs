use std::convert::TryFrom;

use serde::{Deserialize, Serialize};

use super::geometry::{point_segment_distance_2d, GeoPoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Test case a route belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteLabel {
    MainLobe,
    SideLobe,
    BackLobe,
}

/// Constant-altitude flight path.
///
/// Several routes may share an id when the same ground track is flown at
/// different heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RouteRepr<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Route<T> {
    pub id: u32,
    pub label: RouteLabel,
    pub leg_altitude: T,
    pub waypoints: Vec<GeoPoint<T>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteRepr<T> {
    id: u32,
    label: RouteLabel,
    leg_altitude: T,
    waypoints: Vec<GeoPoint<T>>,
}

impl<T: Scalar> TryFrom<RouteRepr<T>> for Route<T> {
    type Error = Error;

    fn try_from(r: RouteRepr<T>) -> Result<Self> {
        Route::new(r.id, r.label, r.leg_altitude, r.waypoints)
    }
}

/// Nearest point of a route polyline to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<T> {
    /// Arclength of the nearest point along the polyline, meters.
    pub arclength: T,
    /// Horizontal distance from the query point to the polyline, meters.
    pub horizontal: T,
}

/// Horizontal and vertical offset of a point from a route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineOffset<T> {
    pub horizontal: T,
    pub vertical: T,
}

impl<T: Scalar> Route<T> {
    pub fn new(id: u32, label: RouteLabel, leg_altitude: T, waypoints: Vec<GeoPoint<T>>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::EmptyRoute);
        }
        if waypoints.len() < 2 {
            return Err(Error::DegenerateRoute(format!("route {id} needs at least two waypoints")));
        }
        if !leg_altitude.is_finite() {
            return Err(Error::InvalidInput(format!("route {id} altitude is not finite")));
        }
        for w in &waypoints {
            if !w.is_valid() {
                return Err(Error::InvalidInput(format!("route {id} has an invalid waypoint {w:?}")));
            }
            if w.z != leg_altitude {
                return Err(Error::InvalidInput(format!(
                    "route {id} waypoint altitude {} differs from leg altitude {leg_altitude}",
                    w.z
                )));
            }
        }
        Ok(Self { id, label, leg_altitude, waypoints })
    }

    /// Straight two-waypoint route between horizontal positions `a` and `b`.
    pub fn straight(id: u32, label: RouteLabel, altitude: T, a: [T; 2], b: [T; 2]) -> Result<Self> {
        Self::new(
            id,
            label,
            altitude,
            vec![GeoPoint::new(a[0], a[1], altitude), GeoPoint::new(b[0], b[1], altitude)],
        )
    }

    pub fn segments(&self) -> impl Iterator<Item = ([T; 2], [T; 2])> + '_ {
        self.waypoints.windows(2).map(|w| (w[0].horizontal(), w[1].horizontal()))
    }

    /// Total polyline length, meters.
    pub fn length(&self) -> T {
        self.segments()
            .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
            .fold(T::zero(), |acc, l| acc + l)
    }

    /// Position at arclength `s`, clamped to the route ends.
    pub fn point_at(&self, s: T) -> GeoPoint<T> {
        let mut remaining = s.max(T::zero());
        for (a, b) in self.segments() {
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            if remaining <= len && len > T::zero() {
                let f = remaining / len;
                return GeoPoint::new(a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), self.leg_altitude);
            }
            remaining = remaining - len;
        }
        *self.waypoints.last().expect("route has waypoints")
    }

    /// Nearest point on the polyline (horizontal plane) to `p`.
    pub fn project(&self, p: [T; 2]) -> Projection<T> {
        let mut best = Projection { arclength: T::zero(), horizontal: T::infinity() };
        let mut offset = T::zero();
        for (a, b) in self.segments() {
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let (d, t) = point_segment_distance_2d(p, a, b);
            if d < best.horizontal {
                best = Projection { arclength: offset + t * len, horizontal: d };
            }
            offset = offset + len;
        }
        best
    }
}

/// Horizontal distance to the nearest leg and vertical distance to the
/// leg altitude.
pub fn point_to_polyline_distance<T: Scalar>(p: &GeoPoint<T>, route: &Route<T>) -> Result<PolylineOffset<T>> {
    match route.waypoints.len() {
        0 => Err(Error::EmptyRoute),
        1 => Ok(PolylineOffset {
            horizontal: p.horizontal_distance(&route.waypoints[0]),
            vertical: (p.z - route.leg_altitude).abs(),
        }),
        _ => Ok(PolylineOffset {
            horizontal: route.project(p.horizontal()).horizontal,
            vertical: (p.z - route.leg_altitude).abs(),
        }),
    }
}
