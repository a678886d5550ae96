//! Scanner/telemetry fusion: clock alignment, altitude substitution and
//! on-route filtering.

mod csvio;
mod frame;

use serde::{Deserialize, Serialize};

pub use csvio::{
    parse_fused_csv, parse_scanner_csv, parse_telemetry_csv, write_fused_csv, write_scanner_csv, write_telemetry_csv,
    FUSED_HEADER, SCANNER_HEADER, TELEMETRY_HEADER,
};
pub use frame::{LocalFrame, EARTH_RADIUS_M};

use crate::error::{Error, Result};
use crate::model::{distance_3d, point_to_polyline_distance, FusedSample, GeoPoint, Route, Sample, TelemetryPoint};

/// Grid step of the clock-offset search, seconds.
pub const OFFSET_RESOLUTION_S: f64 = 0.05;

/// Telemetry excursion below which a log counts as stationary, meters.
const MIN_EXCURSION_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub time_tolerance_s: f64,
    pub horiz_gate_m: f64,
    pub vert_gate_m: f64,
    /// Offsets in `[-w, w]` are searched.
    pub offset_search_window_s: f64,
    /// Also replace the scanner's horizontal fix with the drone's.
    pub replace_horizontal: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            time_tolerance_s: 0.5,
            horiz_gate_m: 3.0,
            vert_gate_m: 1.5,
            offset_search_window_s: 10.0,
            replace_horizontal: false,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.time_tolerance_s, self.horiz_gate_m, self.vert_gate_m, self.offset_search_window_s];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("fusion tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Piecewise-linear view of a telemetry log.
struct Track<'a> {
    points: &'a [TelemetryPoint],
}

impl<'a> Track<'a> {
    fn new(points: &'a [TelemetryPoint]) -> Self {
        Self { points }
    }

    fn span(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.t, self.points.last()?.t))
    }

    /// Linear interpolation at drone time `t`; `None` outside the log.
    fn at(&self, t: f64) -> Option<TelemetryPoint> {
        let (t0, t1) = self.span()?;
        if t < t0 || t > t1 {
            return None;
        }
        let i = self.points.partition_point(|p| p.t <= t);
        if i == 0 {
            return Some(self.points[0]);
        }
        if i == self.points.len() {
            return Some(self.points[i - 1]);
        }
        Some(lerp(&self.points[i - 1], &self.points[i], t))
    }

    /// Nearest-in-time match within `tol`, interpolated when both bracketing
    /// points are within tolerance.
    fn matched(&self, t: f64, tol: f64) -> Option<TelemetryPoint> {
        let i = self.points.partition_point(|p| p.t <= t);
        let prev = i.checked_sub(1).map(|j| self.points[j]).filter(|p| t - p.t <= tol);
        let next = self.points.get(i).copied().filter(|p| p.t - t <= tol);
        match (prev, next) {
            (Some(a), Some(b)) => Some(lerp(&a, &b, t)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
    }

    fn max_excursion(&self) -> f64 {
        let Some(first) = self.points.first() else { return 0.0 };
        self.points.iter().map(|p| (p.x - first.x).hypot(p.y - first.y)).fold(0.0, f64::max)
    }
}

fn lerp(a: &TelemetryPoint, b: &TelemetryPoint, t: f64) -> TelemetryPoint {
    let dt = b.t - a.t;
    if dt <= 0.0 {
        return *a;
    }
    let f = (t - a.t) / dt;
    TelemetryPoint {
        t,
        x: a.x + f * (b.x - a.x),
        y: a.y + f * (b.y - a.y),
        alt_baro: a.alt_baro + f * (b.alt_baro - a.alt_baro),
    }
}

/// Scanner-minus-drone clock offset that best aligns the two horizontal
/// trajectories.
///
/// Every multiple of [`OFFSET_RESOLUTION_S`] in the search window is scored
/// by the mean horizontal distance between each scanner fix and the drone
/// position at `t - offset`; offsets covering fewer than half the scanner
/// samples are skipped. Ties go to the smaller magnitude.
pub fn estimate_clock_offset(scan: &[Sample], tel: &[TelemetryPoint], cfg: &FusionConfig) -> Result<f64> {
    cfg.validate()?;
    let track = Track::new(tel);
    if scan.is_empty() || tel.len() < 2 {
        return Err(Error::OffsetUnobservable("logs are empty".into()));
    }
    if track.max_excursion() < MIN_EXCURSION_M {
        return Err(Error::OffsetUnobservable("telemetry shows no horizontal motion".into()));
    }
    let steps = (cfg.offset_search_window_s / OFFSET_RESOLUTION_S).round() as i64;
    let mut best: Option<(f64, f64)> = None;
    // search outward from zero so ties resolve to the smaller offset
    let order = std::iter::once(0).chain((1..=steps).flat_map(|k| [k, -k]));
    for k in order {
        let offset = k as f64 * OFFSET_RESOLUTION_S;
        let mut sum = 0.0;
        let mut n = 0usize;
        for s in scan {
            if let Some(p) = track.at(s.t - offset) {
                sum += (s.pos.x - p.x).hypot(s.pos.y - p.y);
                n += 1;
            }
        }
        if n * 2 < scan.len() || n == 0 {
            continue;
        }
        let cost = sum / n as f64;
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, offset));
        }
    }
    best.map(|(_, o)| o)
        .ok_or_else(|| Error::OffsetUnobservable("no offset in the search window overlaps the logs".into()))
}

/// Joins scanner records to telemetry and keeps those on a planned route.
///
/// Scanner time `t` maps to drone time `t - offset_s`. The matched
/// barometric altitude replaces the scanner's GPS altitude. A sample is kept
/// when some route is within both gates; it goes to the horizontally nearest
/// such route, then the vertically nearest, then the lowest route id.
pub fn fuse(
    scan: &[Sample],
    tel: &[TelemetryPoint],
    routes: &[Route<f64>],
    bs_pos: &GeoPoint<f64>,
    offset_s: f64,
    cfg: &FusionConfig,
) -> Result<Vec<FusedSample>> {
    cfg.validate()?;
    let track = Track::new(tel);
    let mut matched = 0usize;
    let mut out = Vec::new();
    for s in scan {
        let t = s.t - offset_s;
        let Some(m) = track.matched(t, cfg.time_tolerance_s) else { continue };
        matched += 1;
        let (x, y) = if cfg.replace_horizontal { (m.x, m.y) } else { (s.pos.x, s.pos.y) };
        let pos = GeoPoint::new(x, y, m.alt_baro);

        let mut best: Option<(f64, f64, u32, &Route<f64>)> = None;
        for r in routes {
            let off = point_to_polyline_distance(&pos, r)?;
            if off.horizontal > cfg.horiz_gate_m || off.vertical > cfg.vert_gate_m {
                continue;
            }
            let key = (off.horizontal, off.vertical, r.id);
            let better = match best {
                None => true,
                Some((h, v, id, _)) => key.0.total_cmp(&h).then(key.1.total_cmp(&v)).then(key.2.cmp(&id)).is_lt(),
            };
            if better {
                best = Some((key.0, key.1, key.2, r));
            }
        }
        let Some((_, _, _, route)) = best else { continue };
        let distance_to_bs = distance_3d(bs_pos, &pos);
        if !(distance_to_bs > 0.0) {
            continue;
        }
        out.push(FusedSample {
            t,
            pos,
            rsrp: s.rsrp,
            rsrq: s.rsrq,
            sinr: s.sinr,
            rssi: s.rssi,
            route_id: route.id,
            leg_altitude: route.leg_altitude,
            distance_to_bs,
        });
    }
    if matched * 2 < scan.len() {
        return Err(Error::LogsDoNotOverlap { matched, total: scan.len() });
    }
    Ok(out)
}
