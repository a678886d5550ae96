use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// Field strength in dBµV/m per `meas_bandwidth_hz`.
    FieldStrength,
    /// Received power in dBm per `meas_bandwidth_hz`.
    RxPower,
    /// Interference-to-noise ratio threshold in dB.
    Inr,
}

impl LimitKind {
    pub fn unit(&self) -> &'static str {
        match self {
            LimitKind::FieldStrength => "dBuV/m",
            LimitKind::RxPower => "dBm",
            LimitKind::Inr => "dB",
        }
    }
}

/// Regulatory emission limit, serialized as the limit-file JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegulatoryLimit {
    pub kind: LimitKind,
    pub value: f64,
    pub unit: String,
    pub meas_bandwidth_hz: f64,
    pub eval_height_m: f64,
    pub antenna_gain_dbi: f64,
}

impl RegulatoryLimit {
    /// German local-licence edge limit: 32 dBµV/m in 5 MHz at 3 m height.
    pub fn germany() -> Self {
        Self {
            kind: LimitKind::FieldStrength,
            value: 32.0,
            unit: "dBuV/m".into(),
            meas_bandwidth_hz: 5.0e6,
            eval_height_m: 3.0,
            antenna_gain_dbi: 0.0,
        }
    }

    /// Ofcom inter-network I/N coordination threshold. A planning figure;
    /// it cannot be evaluated against RSRP samples.
    pub fn ofcom_inr() -> Self {
        Self {
            kind: LimitKind::Inr,
            value: -6.0,
            unit: "dB".into(),
            meas_bandwidth_hz: 0.0,
            eval_height_m: 0.0,
            antenna_gain_dbi: 0.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "germany" => Some(Self::germany()),
            "ofcom" | "ofcom_inr" => Some(Self::ofcom_inr()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::InvalidInput("limit value must be finite".into()));
        }
        if self.unit != self.kind.unit() {
            return Err(Error::InvalidInput(format!(
                "limit unit `{}` does not match kind (expected `{}`)",
                self.unit,
                self.kind.unit()
            )));
        }
        if self.kind != LimitKind::Inr && !(self.meas_bandwidth_hz.is_finite() && self.meas_bandwidth_hz > 0.0) {
            return Err(Error::InvalidInput("meas_bandwidth_hz must be positive".into()));
        }
        if !self.eval_height_m.is_finite() || !self.antenna_gain_dbi.is_finite() {
            return Err(Error::InvalidInput("limit geometry fields must be finite".into()));
        }
        Ok(())
    }
}
