use serde::{Deserialize, Serialize};

use super::geometry::GeoPoint;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lobe {
    Main,
    Side,
    Back,
}

/// Three-level piecewise-constant azimuth pattern of the base station antenna.
///
/// Azimuths are compass bearings in degrees: 0 is north, 90 is east.
/// Offsets up to `main_halfwidth` from boresight get `main_gain`, offsets up
/// to `side_sector` get `side_gain`, everything further away `back_gain`.
/// There is no elevation dependence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaPattern<T> {
    pub boresight_azimuth_deg: T,
    pub main_gain_dbi: T,
    pub side_gain_dbi: T,
    pub back_gain_dbi: T,
    pub main_halfwidth_deg: T,
    pub side_sector_deg: T,
}

impl<T: Scalar> AntennaPattern<T> {
    pub fn omni(gain_dbi: T) -> Self {
        Self {
            boresight_azimuth_deg: T::zero(),
            main_gain_dbi: gain_dbi,
            side_gain_dbi: gain_dbi,
            back_gain_dbi: gain_dbi,
            main_halfwidth_deg: T::lit(90.0),
            side_sector_deg: T::lit(135.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.boresight_azimuth_deg,
            self.main_gain_dbi,
            self.side_gain_dbi,
            self.back_gain_dbi,
            self.main_halfwidth_deg,
            self.side_sector_deg,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("antenna pattern has non-finite fields".into()));
        }
        if !(self.main_gain_dbi >= self.side_gain_dbi && self.side_gain_dbi >= self.back_gain_dbi) {
            return Err(Error::InvalidInput("antenna gains must satisfy main >= side >= back".into()));
        }
        let half_turn = T::lit(180.0);
        if !(self.main_halfwidth_deg > T::zero() && self.main_halfwidth_deg < half_turn) {
            return Err(Error::InvalidInput("main_halfwidth_deg must lie in (0, 180)".into()));
        }
        if !(self.side_sector_deg >= self.main_halfwidth_deg && self.side_sector_deg <= half_turn) {
            return Err(Error::InvalidInput("side_sector_deg must lie in [main_halfwidth_deg, 180]".into()));
        }
        Ok(())
    }

    /// Unit horizontal vector along boresight.
    pub fn boresight_unit(&self) -> [T; 2] {
        let az = self.boresight_azimuth_deg.to_radians();
        [az.sin(), az.cos()]
    }

    pub fn lobe(&self, azimuth_deg: T) -> Lobe {
        let off = angular_offset_deg(azimuth_deg, self.boresight_azimuth_deg);
        if off <= self.main_halfwidth_deg {
            Lobe::Main
        } else if off <= self.side_sector_deg {
            Lobe::Side
        } else {
            Lobe::Back
        }
    }

    pub fn gain(&self, azimuth_deg: T) -> T {
        match self.lobe(azimuth_deg) {
            Lobe::Main => self.main_gain_dbi,
            Lobe::Side => self.side_gain_dbi,
            Lobe::Back => self.back_gain_dbi,
        }
    }

    /// Gain from an antenna at `from` towards `to`. A target directly above
    /// or below the antenna is treated as on boresight.
    pub fn gain_towards(&self, from: &GeoPoint<T>, to: &GeoPoint<T>) -> T {
        match azimuth_deg(from, to) {
            Some(az) => self.gain(az),
            None => self.main_gain_dbi,
        }
    }
}

/// Compass bearing from `from` to `to`, degrees in [0, 360). `None` when the
/// points coincide horizontally.
pub fn azimuth_deg<T: Scalar>(from: &GeoPoint<T>, to: &GeoPoint<T>) -> Option<T> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == T::zero() && dy == T::zero() {
        return None;
    }
    let deg = dx.atan2(dy).to_degrees();
    Some(if deg < T::zero() { deg + T::lit(360.0) } else { deg })
}

/// Absolute angular difference folded into [0, 180].
pub fn angular_offset_deg<T: Scalar>(a: T, b: T) -> T {
    let full = T::lit(360.0);
    let mut d = (a - b) % full;
    if d < T::zero() {
        d = d + full;
    }
    if d > T::lit(180.0) {
        full - d
    } else {
        d
    }
}
