use serde::{Deserialize, Serialize};

/// Mean Earth radius, meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Equirectangular projection about a fixed origin.
///
/// Good to about a millimeter over a 100 m campaign area; the error grows
/// quadratically with distance from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalFrame {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl LocalFrame {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self { lat_deg, lon_deg }
    }

    fn cos_lat(&self) -> f64 {
        self.lat_deg.to_radians().cos()
    }

    /// (lat, lon) in degrees to (east, north) in meters.
    pub fn to_local(&self, lat_deg: f64, lon_deg: f64) -> (f64, f64) {
        let x = EARTH_RADIUS_M * self.cos_lat() * (lon_deg - self.lon_deg).to_radians();
        let y = EARTH_RADIUS_M * (lat_deg - self.lat_deg).to_radians();
        (x, y)
    }

    /// (east, north) in meters to (lat, lon) in degrees.
    pub fn to_geodetic(&self, x: f64, y: f64) -> (f64, f64) {
        let lat = self.lat_deg + (y / EARTH_RADIUS_M).to_degrees();
        let lon = self.lon_deg + (x / (EARTH_RADIUS_M * self.cos_lat())).to_degrees();
        (lat, lon)
    }
}
