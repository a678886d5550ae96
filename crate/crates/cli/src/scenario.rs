//! Scenario file: every parameter of a simulated campaign in one JSON
//! document.

use std::path::{Path, PathBuf};

use npnkit::analyze::{FitSettings, HeatmapSettings};
use npnkit::comply::DEFAULT_REF_BANDWIDTH_HZ;
use npnkit::fuse::{FusionConfig, LocalFrame};
use npnkit::plan::{build_campaign, CampaignPlan, PlanParameters, MAIN_LOBE_ROUTE_ID};
use npnkit::simulate::{EmissionScenario, ScannerProfile};
use npnkit::{AntennaPattern, BuildingModel, GeoPoint, PathLossModel, RegulatoryLimit};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, StageExt};

const STAGE: &str = "scenario";

/// Ground truth of the simulated base station. The shadowing seed is
/// derived from the scenario seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionSpec {
    pub bs_pos: GeoPoint,
    pub tx_power_dbm: f64,
    pub carrier_hz: f64,
    pub antenna: AntennaPattern,
    pub building: Option<BuildingModel>,
    pub pathloss: PathLossModel,
    #[serde(default = "default_correlation")]
    pub shadow_correlation_m: f64,
}

fn default_correlation() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSettings {
    #[serde(default)]
    pub heatmap: HeatmapSettings,
    /// Defaults to the scanner floor as censoring threshold and a 5% limit.
    #[serde(default)]
    pub fit: Option<FitSettings>,
    /// Truncation bounds; empty picks the default grid.
    #[serde(default)]
    pub d_bounds_m: Vec<f64>,
    /// Routes whose samples enter the path-loss regression.
    #[serde(default = "default_regression_routes")]
    pub regression_routes: Vec<u32>,
}

fn default_regression_routes() -> Vec<u32> {
    vec![MAIN_LOBE_ROUTE_ID]
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self { heatmap: HeatmapSettings::default(), fit: None, d_bounds_m: Vec::new(), regression_routes: default_regression_routes() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplianceSpec {
    /// Preset names (`germany`, `ofcom`) or limit-file paths relative to the
    /// scenario file.
    #[serde(default)]
    pub limits: Vec<String>,
    #[serde(default = "default_ref_bw")]
    pub ref_bandwidth_hz: f64,
    #[serde(default)]
    pub strict_height: bool,
}

fn default_ref_bw() -> f64 {
    DEFAULT_REF_BANDWIDTH_HZ
}

impl Default for ComplianceSpec {
    fn default() -> Self {
        Self { limits: Vec::new(), ref_bandwidth_hz: DEFAULT_REF_BANDWIDTH_HZ, strict_height: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    /// Geodetic origin of the local east/north frame.
    pub origin: LocalFrame,
    pub emission: EmissionSpec,
    pub scanner: ScannerProfile,
    pub plan: PlanParameters,
    pub speed_mps: f64,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    #[serde(default)]
    pub compliance: ComplianceSpec,
}

/// Derives an independent 64-bit seed for a named purpose.
pub fn derive_seed(seed: u64, purpose: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(purpose.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ScenarioFile {
    pub fn emission_scenario(&self) -> EmissionScenario {
        let e = &self.emission;
        EmissionScenario {
            bs_pos: e.bs_pos,
            tx_power_dbm: e.tx_power_dbm,
            carrier_hz: e.carrier_hz,
            antenna: e.antenna,
            building: e.building.clone(),
            pathloss: e.pathloss,
            shadow_seed: derive_seed(self.seed, "shadowing"),
            shadow_correlation_m: e.shadow_correlation_m,
        }
    }

    pub fn fit_settings(&self) -> FitSettings {
        self.analysis.fit.unwrap_or(FitSettings { censor_threshold_dbm: self.scanner.sensitivity_dbm, ..FitSettings::default() })
    }

    pub fn campaign_plan(&self) -> CliResult<CampaignPlan> {
        let building = self
            .emission
            .building
            .as_ref()
            .ok_or_else(|| CliError::new("plan", "route planning needs a building in the emission scenario"))?;
        build_campaign(building, &self.emission.antenna, &self.emission.bs_pos, &self.plan).stage("plan")
    }

    /// Checks everything that can be checked before a stage runs.
    pub fn validate(&self) -> CliResult<()> {
        self.emission_scenario().validate().stage(STAGE)?;
        self.scanner.validate().stage(STAGE)?;
        self.fusion.validate().stage(STAGE)?;
        if !(self.speed_mps.is_finite() && self.speed_mps > 0.0) {
            return Err(CliError::new(STAGE, "speed_mps must be positive"));
        }
        if !(self.origin.lat_deg.abs() < 90.0 && self.origin.lon_deg.abs() <= 180.0) {
            return Err(CliError::new(STAGE, "origin must be a valid latitude/longitude"));
        }
        let h = &self.analysis.heatmap;
        if !(h.cell_m > 0.0 && h.radius_m > 0.0 && h.power > 0.0) {
            return Err(CliError::new(STAGE, "heatmap cell, radius and power must be positive"));
        }
        if !(self.compliance.ref_bandwidth_hz > 0.0) {
            return Err(CliError::new(STAGE, "ref_bandwidth_hz must be positive"));
        }
        Ok(())
    }
}

/// A limit and where it came from.
#[derive(Debug, Clone)]
pub struct ResolvedLimit {
    pub name: String,
    pub limit: RegulatoryLimit,
    /// Hash of the limit file, `None` for presets.
    pub sha256: Option<String>,
}

/// Preset name or path to a limit file. Relative paths resolve against `base`.
pub fn resolve_limit(reference: &str, base: &Path) -> CliResult<ResolvedLimit> {
    if let Some(limit) = RegulatoryLimit::preset(reference) {
        return Ok(ResolvedLimit { name: reference.to_string(), limit, sha256: None });
    }
    let path = base.join(reference);
    let bytes = std::fs::read(&path).map_err(|e| CliError::new("limit", format!("{}: {e}", path.display())))?;
    let limit: RegulatoryLimit =
        serde_json::from_slice(&bytes).map_err(|e| CliError::new("limit", format!("{}: {e}", path.display())))?;
    limit.validate().stage("limit")?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| reference.to_string());
    Ok(ResolvedLimit { name, limit, sha256: Some(sha256_hex(&bytes)) })
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub path: PathBuf,
    pub sha256: String,
    pub file: ScenarioFile,
    pub limits: Vec<ResolvedLimit>,
}

impl LoadedScenario {
    pub fn load(path: &Path, seed_override: Option<u64>) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::new(STAGE, format!("{}: {e}", path.display())))?;
        let mut file: ScenarioFile =
            serde_json::from_slice(&bytes).map_err(|e| CliError::new(STAGE, format!("{}: {e}", path.display())))?;
        if let Some(seed) = seed_override {
            file.seed = seed;
        }
        file.validate()?;
        let base = path.parent().unwrap_or(Path::new("."));
        let limits = file.compliance.limits.iter().map(|r| resolve_limit(r, base)).collect::<CliResult<Vec<_>>>()?;
        Ok(Self { path: path.to_path_buf(), sha256: sha256_hex(&bytes), file, limits })
    }

    pub fn file_name(&self) -> String {
        self.path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }
}
