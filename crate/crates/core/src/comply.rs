//! Regulatory unit conversions and per-sample limit evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FusedSample, GeoPoint, LimitKind, RegulatoryLimit};
use crate::scalar::Scalar;

/// `20 log10(f_MHz) + 77.2` converts dBµV/m to dBm for a 0 dBi antenna.
pub const FIELD_TO_POWER_OFFSET_DB: f64 = 77.2;

/// Default reference bandwidth: one 30 kHz NR resource element, matching RSRP.
pub const DEFAULT_REF_BANDWIDTH_HZ: f64 = 30.0e3;

/// Altitude window around `eval_height_m` used in strict-height mode.
pub const STRICT_HEIGHT_WINDOW_M: f64 = 1.0;

/// Received power (dBm per `ref_bw_hz`) for a field strength given per
/// `limit_bw_hz`.
pub fn field_strength_to_rx_power<T: Scalar>(e_dbuv_m: T, f_hz: T, gain_dbi: T, limit_bw_hz: T, ref_bw_hz: T) -> T {
    let ten = T::lit(10.0);
    let f_mhz = f_hz / T::lit(1.0e6);
    e_dbuv_m - T::lit(20.0) * f_mhz.log10() - T::lit(FIELD_TO_POWER_OFFSET_DB) + gain_dbi
        - ten * (limit_bw_hz / ref_bw_hz).log10()
}

/// Receiver sensitivity loss for an interference-to-noise ratio, dB.
pub fn inr_to_desensitization<T: Scalar>(inr_db: T) -> T {
    let ten = T::lit(10.0);
    ten * (T::one() + ten.powf(inr_db / ten)).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplianceSetup {
    pub carrier_hz: f64,
    /// Bandwidth the samples' power refers to.
    pub ref_bandwidth_hz: f64,
    /// Scanner floor, dBm.
    pub censor_threshold_dbm: Option<f64>,
    /// Only evaluate samples within ±1 m of the limit's evaluation height.
    pub strict_height: bool,
}

/// Limit expressed as dBm in the samples' reference bandwidth.
pub fn limit_to_dbm(limit: &RegulatoryLimit, carrier_hz: f64, ref_bandwidth_hz: f64) -> Result<f64> {
    limit.validate()?;
    if !(carrier_hz > 0.0 && ref_bandwidth_hz > 0.0) {
        return Err(Error::InvalidInput("carrier and reference bandwidth must be positive".into()));
    }
    match limit.kind {
        LimitKind::FieldStrength => Ok(field_strength_to_rx_power(
            limit.value,
            carrier_hz,
            limit.antenna_gain_dbi,
            limit.meas_bandwidth_hz,
            ref_bandwidth_hz,
        )),
        LimitKind::RxPower => Ok(limit.value - 10.0 * (limit.meas_bandwidth_hz / ref_bandwidth_hz).log10()),
        LimitKind::Inr => Err(Error::UnsupportedLimit(
            "I/N limits need an interference-versus-noise decomposition and cannot be checked against RSRP".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    BelowMeasurementFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub t: f64,
    pub pos: GeoPoint<f64>,
    pub rsrp_dbm: f64,
    /// Limit minus RSRP; positive is compliant.
    pub margin_db: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplianceSummary {
    pub evaluated: usize,
    pub pass: usize,
    pub fail: usize,
    pub below_measurement_floor: usize,
    pub excluded_by_height: usize,
    pub min_margin_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub limit: RegulatoryLimit,
    pub setup: ComplianceSetup,
    pub limit_dbm: f64,
    /// The limit sits below the scanner floor, so compliance cannot be shown.
    pub measurement_insufficient: bool,
    pub summary: ComplianceSummary,
    /// Sample with the smallest margin.
    pub worst_case: Option<SampleVerdict>,
    pub verdicts: Vec<SampleVerdict>,
}

pub fn evaluate(samples: &[FusedSample], limit: &RegulatoryLimit, setup: &ComplianceSetup) -> Result<ComplianceReport> {
    let limit_dbm = limit_to_dbm(limit, setup.carrier_hz, setup.ref_bandwidth_hz)?;
    let insufficient = setup.censor_threshold_dbm.is_some_and(|c| limit_dbm < c);

    let mut summary = ComplianceSummary::default();
    let mut verdicts = Vec::with_capacity(samples.len());
    for s in samples {
        if setup.strict_height && (s.pos.z - limit.eval_height_m).abs() > STRICT_HEIGHT_WINDOW_M {
            summary.excluded_by_height += 1;
            continue;
        }
        let margin_db = limit_dbm - s.rsrp;
        let verdict = if insufficient {
            summary.below_measurement_floor += 1;
            Verdict::BelowMeasurementFloor
        } else if margin_db >= 0.0 {
            summary.pass += 1;
            Verdict::Pass
        } else {
            summary.fail += 1;
            Verdict::Fail
        };
        verdicts.push(SampleVerdict { t: s.t, pos: s.pos, rsrp_dbm: s.rsrp, margin_db, verdict });
    }
    summary.evaluated = verdicts.len();
    let worst_case = verdicts.iter().min_by(|a, b| a.margin_db.total_cmp(&b.margin_db)).cloned();
    summary.min_margin_db = worst_case.as_ref().map(|w| w.margin_db);
    Ok(ComplianceReport {
        limit: limit.clone(),
        setup: *setup,
        limit_dbm,
        measurement_insufficient: insufficient,
        summary,
        worst_case,
        verdicts,
    })
}
