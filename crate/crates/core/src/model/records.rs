use serde::{Deserialize, Serialize};

use super::geometry::GeoPoint;

pub const RSRP_MIN_DBM: f64 = -200.0;
pub const RSRP_MAX_DBM: f64 = 0.0;

/// One scanner record. `t` is on the scanner clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub pos: GeoPoint<f64>,
    pub rsrp: f64,
    pub rsrq: Option<f64>,
    pub sinr: Option<f64>,
    pub rssi: Option<f64>,
}

impl Sample {
    pub fn new(t: f64, pos: GeoPoint<f64>, rsrp: f64) -> Self {
        Self { t, pos, rsrp, rsrq: None, sinr: None, rssi: None }
    }
}

pub fn rsrp_in_range(rsrp: f64) -> bool {
    rsrp.is_finite() && (RSRP_MIN_DBM..=RSRP_MAX_DBM).contains(&rsrp)
}

/// One drone telemetry record. `t` is on the drone clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub alt_baro: f64,
}

/// Scanner record aligned to drone time and position, assigned to a route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedSample {
    pub t: f64,
    pub pos: GeoPoint<f64>,
    pub rsrp: f64,
    pub rsrq: Option<f64>,
    pub sinr: Option<f64>,
    pub rssi: Option<f64>,
    pub route_id: u32,
    /// Altitude of the route leg the sample was assigned to.
    pub leg_altitude: f64,
    pub distance_to_bs: f64,
}

impl FusedSample {
    /// Back to a scanner record on the drone clock.
    pub fn to_sample(&self) -> Sample {
        Sample { t: self.t, pos: self.pos, rsrp: self.rsrp, rsrq: self.rsrq, sinr: self.sinr, rssi: self.rssi }
    }
}
