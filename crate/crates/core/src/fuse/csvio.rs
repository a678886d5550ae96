//! CSV log schemas.
//!
//! Scanner: `time_s,lat_deg,lon_deg,alt_m,rsrp_dbm,rsrq_db,sinr_db,rssi_dbm`,
//! telemetry: `time_s,lat_deg,lon_deg,alt_baro_m`, fused:
//! `time_s,x_m,y_m,z_m,route_id,dist_bs_m,rsrp_dbm,rsrq_db,sinr_db,rssi_dbm,leg_alt_m`.
//! Empty optional fields mean the metric is absent.

use std::fmt::Write as _;

use super::frame::LocalFrame;
use crate::error::{Error, Result};
use crate::model::{rsrp_in_range, FusedSample, GeoPoint, Sample, TelemetryPoint};

pub const SCANNER_HEADER: [&str; 8] = ["time_s", "lat_deg", "lon_deg", "alt_m", "rsrp_dbm", "rsrq_db", "sinr_db", "rssi_dbm"];
pub const TELEMETRY_HEADER: [&str; 4] = ["time_s", "lat_deg", "lon_deg", "alt_baro_m"];
pub const FUSED_HEADER: [&str; 11] = [
    "time_s", "x_m", "y_m", "z_m", "route_id", "dist_bs_m", "rsrp_dbm", "rsrq_db", "sinr_db", "rssi_dbm", "leg_alt_m",
];

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::None).from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str], what: &str) -> Result<()> {
    let found = rdr.headers().map_err(|e| Error::Schema(format!("{what} log: unreadable header: {e}")))?;
    let found: Vec<&str> = found.iter().collect();
    if found == expected {
        return Ok(());
    }
    let offending = expected
        .iter()
        .zip(found.iter())
        .find(|(e, f)| e != f)
        .map(|(e, f)| format!("column `{f}` where `{e}` was expected"))
        .unwrap_or_else(|| format!("{} columns where {} were expected", found.len(), expected.len()));
    Err(Error::Schema(format!(
        "{what} log header `{}` does not match `{}`: {offending}",
        found.join(","),
        expected.join(",")
    )))
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize, name: &str) -> Result<&'a str> {
    rec.get(idx).ok_or_else(|| Error::Parse { line: line_of(rec), message: format!("missing field `{name}`") })
}

fn required(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let raw = field(rec, idx, name)?;
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line: line_of(rec), message: format!("field `{name}` is not a number: `{raw}`") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line: line_of(rec), message: format!("field `{name}` is not finite: `{raw}`") });
    }
    Ok(v)
}

fn optional(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<Option<f64>> {
    if field(rec, idx, name)?.trim().is_empty() {
        Ok(None)
    } else {
        required(rec, idx, name).map(Some)
    }
}

fn check_width(rec: &csv::StringRecord, n: usize) -> Result<()> {
    if rec.len() != n {
        return Err(Error::Parse { line: line_of(rec), message: format!("expected {n} fields, found {}", rec.len()) });
    }
    Ok(())
}

fn records<'a, 'b>(rdr: &'a mut csv::Reader<&'b [u8]>) -> impl Iterator<Item = Result<csv::StringRecord>> + use<'a, 'b> {
    rdr.records().map(|r| {
        r.map_err(|e| Error::Parse { line: e.position().map(|p| p.line()).unwrap_or(0), message: e.to_string() })
    })
}

fn checked_rsrp(rec: &csv::StringRecord, v: f64) -> Result<f64> {
    if !rsrp_in_range(v) {
        return Err(Error::Parse { line: line_of(rec), message: format!("rsrp_dbm {v} outside [-200, 0]") });
    }
    Ok(v)
}

pub fn parse_scanner_csv(text: &str, frame: &LocalFrame) -> Result<Vec<Sample>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &SCANNER_HEADER, "scanner")?;
    let mut out = Vec::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        check_width(&rec, SCANNER_HEADER.len())?;
        let t = required(&rec, 0, "time_s")?;
        let (x, y) = frame.to_local(required(&rec, 1, "lat_deg")?, required(&rec, 2, "lon_deg")?);
        let z = required(&rec, 3, "alt_m")?;
        let rsrp = checked_rsrp(&rec, required(&rec, 4, "rsrp_dbm")?)?;
        out.push(Sample {
            t,
            pos: GeoPoint::new(x, y, z),
            rsrp,
            rsrq: optional(&rec, 5, "rsrq_db")?,
            sinr: optional(&rec, 6, "sinr_db")?,
            rssi: optional(&rec, 7, "rssi_dbm")?,
        });
    }
    Ok(out)
}

pub fn parse_telemetry_csv(text: &str, frame: &LocalFrame) -> Result<Vec<TelemetryPoint>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &TELEMETRY_HEADER, "telemetry")?;
    let mut out: Vec<TelemetryPoint> = Vec::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        check_width(&rec, TELEMETRY_HEADER.len())?;
        let t = required(&rec, 0, "time_s")?;
        if out.last().is_some_and(|p| t < p.t) {
            return Err(Error::NonMonotonicTelemetry { line: line_of(&rec) });
        }
        let (x, y) = frame.to_local(required(&rec, 1, "lat_deg")?, required(&rec, 2, "lon_deg")?);
        out.push(TelemetryPoint { t, x, y, alt_baro: required(&rec, 3, "alt_baro_m")? });
    }
    Ok(out)
}

pub fn parse_fused_csv(text: &str) -> Result<Vec<FusedSample>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &FUSED_HEADER, "fused")?;
    let mut out = Vec::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        check_width(&rec, FUSED_HEADER.len())?;
        let route_raw = field(&rec, 4, "route_id")?;
        let route_id = route_raw.trim().parse().map_err(|_| Error::Parse {
            line: line_of(&rec),
            message: format!("field `route_id` is not an integer: `{route_raw}`"),
        })?;
        out.push(FusedSample {
            t: required(&rec, 0, "time_s")?,
            pos: GeoPoint::new(required(&rec, 1, "x_m")?, required(&rec, 2, "y_m")?, required(&rec, 3, "z_m")?),
            route_id,
            distance_to_bs: required(&rec, 5, "dist_bs_m")?,
            rsrp: checked_rsrp(&rec, required(&rec, 6, "rsrp_dbm")?)?,
            rsrq: optional(&rec, 7, "rsrq_db")?,
            sinr: optional(&rec, 8, "sinr_db")?,
            rssi: optional(&rec, 9, "rssi_dbm")?,
            leg_altitude: required(&rec, 10, "leg_alt_m")?,
        });
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Floats are written in shortest round-trip decimal form.
pub fn write_scanner_csv(samples: &[Sample], frame: &LocalFrame) -> String {
    let mut s = SCANNER_HEADER.join(",");
    s.push('\n');
    for r in samples {
        let (lat, lon) = frame.to_geodetic(r.pos.x, r.pos.y);
        let _ = writeln!(s, "{},{},{},{},{},{},{},{}", r.t, lat, lon, r.pos.z, r.rsrp, opt(r.rsrq), opt(r.sinr), opt(r.rssi));
    }
    s
}

pub fn write_telemetry_csv(points: &[TelemetryPoint], frame: &LocalFrame) -> String {
    let mut s = TELEMETRY_HEADER.join(",");
    s.push('\n');
    for p in points {
        let (lat, lon) = frame.to_geodetic(p.x, p.y);
        let _ = writeln!(s, "{},{},{},{}", p.t, lat, lon, p.alt_baro);
    }
    s
}

pub fn write_fused_csv(samples: &[FusedSample]) -> String {
    let mut s = FUSED_HEADER.join(",");
    s.push('\n');
    for r in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.pos.x,
            r.pos.y,
            r.pos.z,
            r.route_id,
            r.distance_to_bs,
            r.rsrp,
            opt(r.rsrq),
            opt(r.sinr),
            opt(r.rssi),
            r.leg_altitude
        );
    }
    s
}
