//! Subcommand implementations. Each returns the files it produced, keyed by
//! path relative to its output root; the caller writes them.

use std::collections::BTreeMap;

use clap::ValueEnum;
use log::{info, warn};
use npnkit::analyze::{
    ecdf, fit_truncated_family, heatmap, reconstruct_band, Envelope, FitSettings, FlightCdf, FlightKey, RegressionResult,
};
use npnkit::comply::{evaluate, ComplianceReport, ComplianceSetup};
use npnkit::fuse::{
    estimate_clock_offset, fuse, parse_fused_csv, parse_scanner_csv, parse_telemetry_csv, write_fused_csv,
    write_scanner_csv, write_telemetry_csv, FusionConfig, LocalFrame,
};
use npnkit::plan::CampaignPlan;
use npnkit::simulate::{fly, EmissionField, FlightLogs};
use npnkit::{FusedSample, GeoPoint, Route};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult, StageExt};
use crate::output::{Manifest, Outputs};
use crate::scenario::{derive_seed, AnalysisSettings, LoadedScenario, ResolvedLimit};

/// Encoding for heatmaps and fused samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Geojson,
}

/// One flown route repetition.
#[derive(Debug, Clone, Serialize)]
pub struct Flight {
    pub name: String,
    pub route_id: u32,
    pub altitude_m: f64,
    pub repeat: u32,
    #[serde(skip)]
    pub route: Route,
}

pub fn flights(plan: &CampaignPlan) -> Vec<Flight> {
    let mut out = Vec::new();
    for route in &plan.routes {
        for rep in 1..=plan.repeats {
            let name = format!("flight{:02}_route{}_alt{}m_rep{}", out.len() + 1, route.id, route.leg_altitude, rep);
            out.push(Flight { name, route_id: route.id, altitude_m: route.leg_altitude, repeat: rep, route: route.clone() });
        }
    }
    out
}

pub fn scanner_file(name: &str) -> String {
    format!("flights/{name}_scanner.csv")
}

pub fn telemetry_file(name: &str) -> String {
    format!("flights/{name}_telemetry.csv")
}

pub fn cmd_plan(sc: &LoadedScenario) -> CliResult<CampaignPlan> {
    sc.file.campaign_plan()
}

/// Simulated logs for every flight, in plan order.
pub fn simulate_flights(sc: &LoadedScenario, plan: &CampaignPlan) -> CliResult<Vec<(Flight, FlightLogs)>> {
    let field = EmissionField::new(sc.file.emission_scenario()).stage("simulate")?;
    let seed = sc.file.seed;
    flights(plan)
        .into_par_iter()
        .map(|f| {
            let logs = fly(&field, &sc.file.scanner, &f.route, sc.file.speed_mps, derive_seed(seed, &f.name)).stage("simulate")?;
            info!("simulated {}: {} scanner records", f.name, logs.scanner.len());
            Ok((f, logs))
        })
        .collect()
}

/// Scanner and telemetry CSVs plus the plan and a flight index under `flights/`.
pub fn cmd_simulate(sc: &LoadedScenario) -> CliResult<Outputs> {
    let plan = cmd_plan(sc)?;
    let sim = simulate_flights(sc, &plan)?;
    let frame = &sc.file.origin;
    let mut out = Outputs::new();
    for (f, logs) in &sim {
        out.add(scanner_file(&f.name), write_scanner_csv(&logs.scanner, frame));
        out.add(telemetry_file(&f.name), write_telemetry_csv(&logs.telemetry, frame));
    }
    out.add_json("flights/plan.json", &plan)?;
    out.add_json("flights/index.json", &sim.iter().map(|(f, _)| f).collect::<Vec<_>>())?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FuseOutcome {
    pub offset_s: f64,
    /// Offset came from the search rather than the caller.
    pub estimated: bool,
    pub scanner_records: usize,
    pub kept: usize,
    #[serde(skip)]
    pub samples: Vec<FusedSample>,
}

/// Parses a scanner/telemetry pair and fuses it onto `routes`. Without an
/// explicit `offset_s` the clock offset is estimated.
pub fn fuse_logs(
    scanner_csv: &str,
    telemetry_csv: &str,
    frame: &LocalFrame,
    routes: &[Route],
    bs_pos: &GeoPoint,
    cfg: &FusionConfig,
    offset_s: Option<f64>,
) -> CliResult<FuseOutcome> {
    let scan = parse_scanner_csv(scanner_csv, frame).map_err(|e| CliError::new("fuse", format!("scanner log: {e}")))?;
    let tel = parse_telemetry_csv(telemetry_csv, frame).map_err(|e| CliError::new("fuse", format!("telemetry log: {e}")))?;
    let (offset_s, estimated) = match offset_s {
        Some(o) => (o, false),
        None => (estimate_clock_offset(&scan, &tel, cfg).stage("fuse")?, true),
    };
    let samples = fuse(&scan, &tel, routes, bs_pos, offset_s, cfg).stage("fuse")?;
    Ok(FuseOutcome { offset_s, estimated, scanner_records: scan.len(), kept: samples.len(), samples })
}

pub fn encode_fused(samples: &[FusedSample], format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => Ok(write_fused_csv(samples).into_bytes()),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(samples).map_err(|e| CliError::new("output", e))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Geojson => Err(CliError::new("fuse", "fused samples are written as csv or json")),
    }
}

/// Fused samples of one flight.
#[derive(Debug, Clone)]
pub struct FusedFlight {
    pub name: String,
    pub samples: Vec<FusedSample>,
}

pub fn read_fused(name: &str, text: &str) -> CliResult<FusedFlight> {
    let samples = parse_fused_csv(text).map_err(|e| CliError::new("analyze", format!("{name}: {e}")))?;
    Ok(FusedFlight { name: name.to_string(), samples })
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub routes: Vec<u32>,
    pub regression: RegressionResult,
    pub band: Envelope,
    /// Share of the regression samples inside the ±3σ band.
    pub band_containment: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CdfEntry<'a> {
    source: &'a str,
    #[serde(flatten)]
    cdf: FlightCdf,
}

fn key_bits(route_id: u32, alt: f64) -> (u32, u64) {
    (route_id, alt.to_bits())
}

/// Heatmaps per route, per-flight CDFs and the truncated regression under
/// `analysis/`.
pub fn analyze(
    flights: &[FusedFlight],
    plan: &CampaignPlan,
    settings: &AnalysisSettings,
    fit: &FitSettings,
    frame: &LocalFrame,
    format: Format,
) -> CliResult<Outputs> {
    let mut out = Outputs::new();

    let mut by_route: BTreeMap<u32, Vec<FusedSample>> = BTreeMap::new();
    for f in flights {
        for s in &f.samples {
            by_route.entry(s.route_id).or_default().push(s.clone());
        }
    }
    for (id, samples) in &by_route {
        let Some(route) = plan.routes.iter().find(|r| r.id == *id) else {
            warn!("route {id} is not in the plan; no heatmap");
            continue;
        };
        let grid = heatmap(samples, route, &settings.heatmap).stage("analyze")?;
        let base = format!("analysis/heatmap_route{id}");
        match format {
            Format::Csv => out.add(format!("{base}.csv"), grid.to_csv()),
            Format::Json => out.add_json(format!("{base}.json"), &grid)?,
            Format::Geojson => out.add_json(format!("{base}.geojson"), &grid.to_geojson(route, frame))?,
        }
    }

    // one CDF per (flight, route, altitude); flights of the same route and
    // altitude are numbered in input order
    let mut flight_no: BTreeMap<(u32, u64), usize> = BTreeMap::new();
    let mut groups: Vec<(&str, FlightKey, Vec<f64>)> = Vec::new();
    for f in flights {
        let mut local: BTreeMap<(u32, u64), (f64, Vec<f64>)> = BTreeMap::new();
        for s in &f.samples {
            local.entry(key_bits(s.route_id, s.leg_altitude)).or_insert((s.leg_altitude, Vec::new())).1.push(s.rsrp);
        }
        for ((route_id, bits), (alt, values)) in local {
            let n = flight_no.entry((route_id, bits)).or_insert(0);
            *n += 1;
            groups.push((&f.name, FlightKey { route_id, altitude_m: alt, flight: *n }, values));
        }
    }
    let cdfs = ecdf(&groups.iter().map(|(_, k, v)| (*k, v.clone())).collect::<Vec<_>>()).stage("analyze")?;
    let entries: Vec<CdfEntry> = groups.iter().zip(cdfs).map(|((src, _, _), cdf)| CdfEntry { source: src, cdf }).collect();
    out.add_json("analysis/cdf.json", &entries)?;

    let fit_samples: Vec<FusedSample> = flights
        .iter()
        .flat_map(|f| &f.samples)
        .filter(|s| settings.regression_routes.is_empty() || settings.regression_routes.contains(&s.route_id))
        .cloned()
        .collect();
    let regression = fit_truncated_family(&fit_samples, &settings.d_bounds_m, fit).stage("analyze")?;
    let band = reconstruct_band(&regression).stage("analyze")?;
    let d: Vec<f64> = fit_samples.iter().map(|s| s.distance_to_bs).collect();
    let y: Vec<f64> = fit_samples.iter().map(|s| s.rsrp).collect();
    let band_containment = band.containment(&d, &y);
    if let Some(sel) = regression.selected_fit() {
        info!(
            "selected fit: n = {:.3}, sigma = {:.2} dB, d_max = {:.1} m, {} points",
            sel.exponent, sel.sigma_resid_db, sel.d_max_m, sel.n_points
        );
    }
    out.add_json(
        "analysis/regression.json",
        &RegressionReport { routes: settings.regression_routes.clone(), regression, band, band_containment },
    )?;
    Ok(out)
}

pub fn compliance_setup(sc: &LoadedScenario, strict_height: bool) -> ComplianceSetup {
    ComplianceSetup {
        carrier_hz: sc.file.emission.carrier_hz,
        ref_bandwidth_hz: sc.file.compliance.ref_bandwidth_hz,
        censor_threshold_dbm: sc.file.scanner.sensitivity_dbm,
        strict_height: strict_height || sc.file.compliance.strict_height,
    }
}

pub fn cmd_comply(samples: &[FusedSample], limit: &ResolvedLimit, setup: &ComplianceSetup) -> CliResult<ComplianceReport> {
    let report = evaluate(samples, &limit.limit, setup).stage("comply")?;
    let s = &report.summary;
    info!(
        "{}: limit {:.1} dBm, {} pass, {} fail, {} below floor",
        limit.name, report.limit_dbm, s.pass, s.fail, s.below_measurement_floor
    );
    Ok(report)
}

/// simulate, fuse, analyze and comply in one run, with a manifest.
pub fn cmd_campaign(sc: &LoadedScenario, format: Format, strict_height: bool) -> CliResult<Outputs> {
    let file = &sc.file;
    let mut manifest = Manifest::new("campaign", Some(file.seed));
    manifest.input("scenario", &sc.file_name(), Some(sc.sha256.clone()));
    for l in &sc.limits {
        manifest.input("limit", &l.name, l.sha256.clone());
    }

    let mut out = cmd_simulate(sc)?;
    let plan = cmd_plan(sc)?;
    let index = flights(&plan);

    let fused: Vec<(String, FuseOutcome)> = index
        .par_iter()
        .map(|f| {
            let text = |rel: &str| {
                out.get(rel)
                    .map(|b| String::from_utf8_lossy(b).into_owned())
                    .ok_or_else(|| CliError::new("fuse", format!("missing {rel}")))
            };
            let o = fuse_logs(
                &text(&scanner_file(&f.name))?,
                &text(&telemetry_file(&f.name))?,
                &file.origin,
                &plan.routes,
                &file.emission.bs_pos,
                &file.fusion,
                None,
            )
            .map_err(|e| CliError::new(e.stage, format!("{}: {}", f.name, e.message)))?;
            info!("fused {}: offset {:+.2} s, kept {}/{}", f.name, o.offset_s, o.kept, o.scanner_records);
            Ok((f.name.clone(), o))
        })
        .collect::<CliResult<_>>()?;
    let mut offsets = BTreeMap::new();
    for (name, o) in &fused {
        out.add(format!("fused/{name}.csv"), write_fused_csv(&o.samples));
        offsets.insert(name.clone(), o.clone());
    }
    out.add_json("fused/offsets.json", &offsets)?;

    let fused_flights: Vec<FusedFlight> =
        fused.into_iter().map(|(name, o)| FusedFlight { name, samples: o.samples }).collect();
    out.extend(analyze(&fused_flights, &plan, &file.analysis, &file.fit_settings(), &file.origin, format)?);

    let all: Vec<FusedSample> = fused_flights.iter().flat_map(|f| f.samples.iter().cloned()).collect();
    let setup = compliance_setup(sc, strict_height);
    for l in &sc.limits {
        match cmd_comply(&all, l, &setup) {
            Ok(report) => out.add_json(format!("compliance/{}.json", l.name), &report)?,
            Err(e) if matches!(l.limit.kind, npnkit::LimitKind::Inr) => {
                warn!("{}: {}", l.name, e.message);
                manifest.notes.push(format!("compliance/{}: skipped, {}", l.name, e.message));
            }
            Err(e) => return Err(e),
        }
    }
    manifest.seal(&mut out)?;
    Ok(out)
}
