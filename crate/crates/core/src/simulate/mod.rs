//! Synthetic emission fields and virtual scanner flights.

mod shadow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use shadow::ShadowField;

use crate::error::{Error, Result};
use crate::model::{distance_3d, AntennaPattern, BuildingModel, GeoPoint, PathLossModel, Route, Sample, TelemetryPoint};

/// Drone telemetry logging rate, Hz.
pub const TELEMETRY_RATE_HZ: f64 = 10.0;

pub const MAX_TX_POWER_DBM: f64 = 50.0;

/// Ground truth for one indoor base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionScenario {
    pub bs_pos: GeoPoint<f64>,
    pub tx_power_dbm: f64,
    pub carrier_hz: f64,
    pub antenna: AntennaPattern<f64>,
    pub building: Option<BuildingModel<f64>>,
    pub pathloss: PathLossModel<f64>,
    pub shadow_seed: u64,
    /// Standard deviation of the shadowing smoothing kernel, meters.
    #[serde(default = "default_correlation")]
    pub shadow_correlation_m: f64,
}

fn default_correlation() -> f64 {
    5.0
}

impl EmissionScenario {
    pub fn validate(&self) -> Result<()> {
        if !self.bs_pos.is_valid() {
            return Err(Error::InvalidInput("base station position is invalid".into()));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::InvalidInput("carrier frequency must be positive".into()));
        }
        if !(self.tx_power_dbm.is_finite() && self.tx_power_dbm <= MAX_TX_POWER_DBM) {
            return Err(Error::InvalidInput(format!("tx power must be finite and at most {MAX_TX_POWER_DBM} dBm")));
        }
        self.antenna.validate()?;
        self.pathloss.validate()?;
        if let Some(b) = &self.building {
            b.validate()?;
            if !b.contains(&self.bs_pos) {
                return Err(Error::InvalidInput("base station must be inside the building".into()));
            }
        }
        Ok(())
    }
}

/// Evaluates received power anywhere outside the building.
#[derive(Debug)]
pub struct EmissionField {
    scenario: EmissionScenario,
    shadow: ShadowField,
}

impl EmissionField {
    pub fn new(scenario: EmissionScenario) -> Result<Self> {
        scenario.validate()?;
        let shadow =
            ShadowField::new(scenario.shadow_seed, scenario.pathloss.sigma_db, scenario.shadow_correlation_m)?;
        Ok(Self { scenario, shadow })
    }

    pub fn scenario(&self) -> &EmissionScenario {
        &self.scenario
    }

    /// Received power without the shadowing term, dBm.
    pub fn mean_rsrp(&self, p: &GeoPoint<f64>) -> Result<f64> {
        let scn = &self.scenario;
        let d = distance_3d(&scn.bs_pos, p);
        if !(d > 0.0) {
            return Err(Error::InvalidInput("receiver coincides with the base station".into()));
        }
        let penetration = match &scn.building {
            Some(b) => b.penetration_loss(&scn.bs_pos, p)?,
            None => 0.0,
        };
        Ok(scn.tx_power_dbm + scn.antenna.gain_towards(&scn.bs_pos, p) - scn.pathloss.mean_loss_db(d) - penetration)
    }

    /// Received power including shadowing, dBm.
    pub fn true_rsrp(&self, p: &GeoPoint<f64>) -> Result<f64> {
        Ok(self.mean_rsrp(p)? + self.shadow.sample(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloorPolicy {
    Drop,
    Clamp,
}

/// Virtual scanner characteristics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScannerProfile {
    pub sample_rate_hz: f64,
    /// Detection floor, dBm. `None` disables censoring.
    pub sensitivity_dbm: Option<f64>,
    pub gps_alt_noise_sigma_m: f64,
    pub gps_horiz_noise_sigma_m: f64,
    /// Scanner clock minus drone clock, seconds.
    pub clock_offset_s: f64,
    pub below_floor_policy: FloorPolicy,
}

impl ScannerProfile {
    /// Noise-free, uncensored scanner in sync with the drone clock.
    pub fn ideal(sample_rate_hz: f64) -> Self {
        Self {
            sample_rate_hz,
            sensitivity_dbm: None,
            gps_alt_noise_sigma_m: 0.0,
            gps_horiz_noise_sigma_m: 0.0,
            clock_offset_s: 0.0,
            below_floor_policy: FloorPolicy::Drop,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidInput("scanner sample rate must be positive".into()));
        }
        let sig = [self.gps_alt_noise_sigma_m, self.gps_horiz_noise_sigma_m];
        if sig.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidInput("GPS noise sigmas must be non-negative".into()));
        }
        if !self.clock_offset_s.is_finite() {
            return Err(Error::InvalidInput("clock offset must be finite".into()));
        }
        if self.sensitivity_dbm.is_some_and(|s| s.is_nan()) {
            return Err(Error::InvalidInput("sensitivity must not be NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlightLogs {
    pub scanner: Vec<Sample>,
    pub telemetry: Vec<TelemetryPoint>,
}

/// Flies `route` at constant `speed` and records both logs.
///
/// Telemetry holds exact positions at [`TELEMETRY_RATE_HZ`]. Scanner records
/// carry the true RSRP but GPS positions with independent Gaussian noise, and
/// timestamps shifted by the profile's clock offset. `seed` drives the GPS
/// noise only; the RSRP field is fixed by the scenario.
pub fn fly(field: &EmissionField, prof: &ScannerProfile, route: &Route<f64>, speed_mps: f64, seed: u64) -> Result<FlightLogs> {
    prof.validate()?;
    if !(speed_mps.is_finite() && speed_mps > 0.0) {
        return Err(Error::InvalidInput("flight speed must be positive".into()));
    }
    let length = route.length();
    if !(length > 0.0) {
        return Err(Error::DegenerateRoute(format!("route {} has zero length", route.id)));
    }
    let duration = length / speed_mps;

    let mut telemetry = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 / TELEMETRY_RATE_HZ;
        if t > duration {
            break;
        }
        let q = route.point_at(speed_mps * t);
        telemetry.push(TelemetryPoint { t, x: q.x, y: q.y, alt_baro: q.z });
        k += 1;
    }
    if telemetry.last().is_some_and(|l| l.t < duration) {
        let q = route.point_at(length);
        telemetry.push(TelemetryPoint { t: duration, x: q.x, y: q.y, alt_baro: q.z });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horiz = Normal::new(0.0, prof.gps_horiz_noise_sigma_m).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let vert = Normal::new(0.0, prof.gps_alt_noise_sigma_m).map_err(|e| Error::InvalidInput(e.to_string()))?;

    let mut scanner = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 / prof.sample_rate_hz;
        if t > duration {
            break;
        }
        k += 1;
        let truth = route.point_at(speed_mps * t);
        // draw noise unconditionally so censoring does not shift the stream
        let noise = [horiz.sample(&mut rng), horiz.sample(&mut rng), vert.sample(&mut rng)];
        let mut rsrp = field.true_rsrp(&truth)?;
        if let Some(floor) = prof.sensitivity_dbm {
            if rsrp < floor {
                match prof.below_floor_policy {
                    FloorPolicy::Drop => continue,
                    FloorPolicy::Clamp => rsrp = floor,
                }
            }
        }
        let pos = GeoPoint::new(truth.x + noise[0], truth.y + noise[1], truth.z + noise[2]);
        scanner.push(Sample::new(t + prof.clock_offset_s, pos, rsrp));
    }
    Ok(FlightLogs { scanner, telemetry })
}
