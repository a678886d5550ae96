use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fuse::LocalFrame;
use crate::model::{FusedSample, Route};
use crate::scalar::{dbm_to_mw, mw_to_dbm, Scalar};

/// Averaging domain for IDW.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationSpace {
    /// Average powers in milliwatts.
    #[default]
    Linear,
    /// Average dB values directly.
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapSettings {
    pub cell_m: f64,
    pub radius_m: f64,
    pub power: f64,
    pub space: InterpolationSpace,
}

impl Default for HeatmapSettings {
    fn default() -> Self {
        Self { cell_m: 1.0, radius_m: 1.5, power: 2.0, space: InterpolationSpace::Linear }
    }
}

/// Inverse-distance-weighted mean of the `values` within `radius` of
/// `target`. A point closer than machine precision wins outright; several
/// such points are averaged.
pub fn idw<T: Scalar>(target: [T; 2], points: &[([T; 2], T)], radius: T, power: T) -> Option<T> {
    let eps = T::epsilon() * (T::one() + target[0].abs().max(target[1].abs()));
    let mut exact_sum = T::zero();
    let mut exact_n = 0usize;
    let mut num = T::zero();
    let mut den = T::zero();
    for (p, v) in points {
        let d = (p[0] - target[0]).hypot(p[1] - target[1]);
        if d > radius {
            continue;
        }
        if d <= eps {
            exact_sum = exact_sum + *v;
            exact_n += 1;
            continue;
        }
        let w = d.powf(-power);
        num = num + w * *v;
        den = den + w;
    }
    if exact_n > 0 {
        Some(exact_sum / T::lit(exact_n as f64))
    } else if den > T::zero() {
        Some(num / den)
    } else {
        None
    }
}

/// RSRP unfolded onto the (arclength along route, altitude) plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub route_id: u32,
    pub cell_m: f64,
    /// Cell centers along the route, meters.
    pub axis_u: Vec<f64>,
    /// Cell centers in altitude, meters.
    pub axis_v: Vec<f64>,
    /// Row-major over `axis_v`, dBm; `None` where no sample is in range.
    pub cells: Vec<Option<f64>>,
}

impl HeatmapGrid {
    pub fn get(&self, iu: usize, iv: usize) -> Option<f64> {
        self.cells[iv * self.axis_u.len() + iu]
    }

    pub fn row(&self, iv: usize) -> &[Option<f64>] {
        let n = self.axis_u.len();
        &self.cells[iv * n..(iv + 1) * n]
    }

    /// Index of the row whose center is nearest `altitude`.
    pub fn row_index(&self, altitude: f64) -> Option<usize> {
        self.axis_v
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - altitude).abs().total_cmp(&(b.1 - altitude).abs()))
            .map(|(i, _)| i)
    }

    /// Matrix CSV: header row of arclength centers, one row per altitude
    /// (ascending), empty cells left blank.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("altitude_m");
        for u in &self.axis_u {
            s.push(',');
            s.push_str(&u.to_string());
        }
        s.push('\n');
        for (iv, v) in self.axis_v.iter().enumerate() {
            s.push_str(&v.to_string());
            for c in self.row(iv) {
                s.push(',');
                if let Some(c) = c {
                    s.push_str(&c.to_string());
                }
            }
            s.push('\n');
        }
        s
    }

    /// GeoJSON FeatureCollection of non-empty cell centers.
    pub fn to_geojson(&self, route: &Route<f64>, frame: &LocalFrame) -> Value {
        let mut features = Vec::new();
        for (iv, v) in self.axis_v.iter().enumerate() {
            for (iu, u) in self.axis_u.iter().enumerate() {
                let Some(rsrp) = self.get(iu, iv) else { continue };
                let p = route.point_at(*u);
                let (lat, lon) = frame.to_geodetic(p.x, p.y);
                features.push(json!({
                    "type": "Feature",
                    "geometry": { "type": "Point", "coordinates": [lon, lat, v] },
                    "properties": {
                        "rsrp_dbm": rsrp,
                        "route_id": self.route_id,
                        "arclength_m": u,
                        "altitude_m": v,
                        "x_m": p.x,
                        "y_m": p.y,
                    }
                }));
            }
        }
        json!({ "type": "FeatureCollection", "features": features })
    }
}

/// Interpolates samples onto a regular grid over (arclength, altitude).
///
/// Arclength is the position of each sample's horizontal projection onto
/// the route polyline; altitude is the fused `z`. Rows are placed on
/// multiples of the cell size covering the sample altitudes.
pub fn heatmap(samples: &[FusedSample], route: &Route<f64>, settings: &HeatmapSettings) -> Result<HeatmapGrid> {
    if !(settings.cell_m.is_finite() && settings.cell_m > 0.0) || !(settings.radius_m.is_finite() && settings.radius_m > 0.0) {
        return Err(Error::InvalidInput("heatmap cell and radius must be positive".into()));
    }
    if !(settings.power.is_finite() && settings.power > 0.0) {
        return Err(Error::InvalidInput("IDW power must be positive".into()));
    }
    let cell = settings.cell_m;
    let length = route.length();
    let n_u = ((length / cell).ceil() as usize).max(1);
    let axis_u: Vec<f64> = (0..n_u).map(|i| (i as f64 + 0.5) * cell).collect();

    let (z_lo, z_hi) = if samples.is_empty() {
        (route.leg_altitude, route.leg_altitude)
    } else {
        samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.pos.z), hi.max(s.pos.z)))
    };
    let (k_lo, k_hi) = ((z_lo / cell).round() as i64, (z_hi / cell).round() as i64);
    let axis_v: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64 * cell).collect();

    let points: Vec<([f64; 2], f64)> = samples
        .iter()
        .map(|s| {
            let u = route.project(s.pos.horizontal()).arclength;
            let value = match settings.space {
                InterpolationSpace::Linear => dbm_to_mw(s.rsrp),
                InterpolationSpace::Db => s.rsrp,
            };
            ([u, s.pos.z], value)
        })
        .collect();

    let mut cells = Vec::with_capacity(axis_u.len() * axis_v.len());
    for v in &axis_v {
        for u in &axis_u {
            let value = idw([*u, *v], &points, settings.radius_m, settings.power).map(|x| match settings.space {
                InterpolationSpace::Linear => mw_to_dbm(x),
                InterpolationSpace::Db => x,
            });
            cells.push(value);
        }
    }
    Ok(HeatmapGrid { route_id: route.id, cell_m: cell, axis_u, axis_v, cells })
}
