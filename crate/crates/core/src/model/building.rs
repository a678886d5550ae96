use serde::{Deserialize, Serialize};

use super::geometry::{segments_intersect, GeoPoint, Rect, Span};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Full-height interior wall, given by its horizontal end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteriorWall<T> {
    pub start: [T; 2],
    pub end: [T; 2],
}

/// Box-shaped building with a flat roof.
///
/// `east_windows` are floor-to-roof window spans along the east wall, given
/// as northing intervals. `roof_windows` are rectangles on the roof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingModel<T> {
    pub footprint: Rect<T>,
    pub roof_height_m: T,
    pub wall_loss_db: T,
    pub window_loss_db: T,
    #[serde(default)]
    pub east_windows: Vec<Span<T>>,
    #[serde(default)]
    pub roof_windows: Vec<Rect<T>>,
    #[serde(default)]
    pub interior_walls: Vec<InteriorWall<T>>,
    pub interior_wall_loss_db: T,
    pub max_interior_walls: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    East,
    West,
    North,
    South,
    Roof,
}

/// Where and how a ray from inside the building leaves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayExit<T> {
    pub point: GeoPoint<T>,
    pub face: Face,
    pub through_window: bool,
    /// Interior walls crossed before the exit, already capped.
    pub interior_walls: usize,
}

impl<T: Scalar> BuildingModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.footprint.is_valid() {
            return Err(Error::InvalidInput("building footprint must be a non-empty finite rectangle".into()));
        }
        if !(self.roof_height_m.is_finite() && self.roof_height_m > T::zero()) {
            return Err(Error::InvalidInput("roof height must be positive".into()));
        }
        let losses = [self.wall_loss_db, self.window_loss_db, self.interior_wall_loss_db];
        if losses.iter().any(|l| !l.is_finite() || *l < T::zero()) {
            return Err(Error::InvalidInput("building losses must be finite and non-negative".into()));
        }
        if self.window_loss_db > self.wall_loss_db {
            return Err(Error::InvalidInput("window loss must not exceed wall loss".into()));
        }
        if self.max_interior_walls > 2 {
            return Err(Error::InvalidInput("at most two interior walls may be crossed".into()));
        }
        if self.east_windows.iter().any(|s| !s.is_valid()) || self.roof_windows.iter().any(|r| !r.is_valid()) {
            return Err(Error::InvalidInput("window geometry is invalid".into()));
        }
        Ok(())
    }

    /// Inside the footprint and below the roof. The footprint boundary
    /// counts as outside.
    pub fn contains(&self, p: &GeoPoint<T>) -> bool {
        self.footprint.contains_strict(p.x, p.y) && p.z < self.roof_height_m
    }

    /// Traces the straight ray `from` (inside) to `to` (outside) through the
    /// building shell.
    pub fn trace_exit(&self, from: &GeoPoint<T>, to: &GeoPoint<T>) -> Result<RayExit<T>> {
        if !self.contains(from) {
            return Err(Error::InvalidInput("ray origin must be inside the building".into()));
        }
        if self.contains(to) {
            return Err(Error::InsideBuilding {
                x: to.x.to_f64_lossy(),
                y: to.y.to_f64_lossy(),
                z: to.z.to_f64_lossy(),
            });
        }
        let fp = &self.footprint;
        let d = [to.x - from.x, to.y - from.y, to.z - from.z];
        let inf = T::infinity();
        let zero = T::zero();
        let t_of = |delta: T, lo: T, hi: T, origin: T| -> T {
            if delta > zero {
                (hi - origin) / delta
            } else if delta < zero {
                (lo - origin) / delta
            } else {
                inf
            }
        };
        let tx = t_of(d[0], fp.x_min, fp.x_max, from.x);
        let ty = t_of(d[1], fp.y_min, fp.y_max, from.y);
        let tz = if d[2] > zero { (self.roof_height_m - from.z) / d[2] } else { inf };

        let (t_exit, face) = if tx <= ty && tx <= tz {
            (tx, if d[0] > zero { Face::East } else { Face::West })
        } else if ty <= tz {
            (ty, if d[1] > zero { Face::North } else { Face::South })
        } else {
            (tz, Face::Roof)
        };
        let point = GeoPoint::new(from.x + t_exit * d[0], from.y + t_exit * d[1], from.z + t_exit * d[2]);

        let through_window = match face {
            Face::East => self.east_windows.iter().any(|s| s.contains(point.y)),
            Face::Roof => self.roof_windows.iter().any(|r| r.contains(point.x, point.y)),
            _ => false,
        };

        let crossed = self
            .interior_walls
            .iter()
            .filter(|w| segments_intersect(from.horizontal(), point.horizontal(), w.start, w.end))
            .count()
            .min(self.max_interior_walls as usize);

        Ok(RayExit { point, face, through_window, interior_walls: crossed })
    }

    /// Shell plus interior-wall attenuation along the ray, dB.
    pub fn penetration_loss(&self, from: &GeoPoint<T>, to: &GeoPoint<T>) -> Result<T> {
        let exit = self.trace_exit(from, to)?;
        let shell = if exit.through_window { self.window_loss_db } else { self.wall_loss_db };
        Ok(shell + self.interior_wall_loss_db * T::lit(exit.interior_walls as f64))
    }
}
