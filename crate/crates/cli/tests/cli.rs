use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_npnkit"))
}

fn scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/reference_site.json")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn npnkit")
}

fn simulate(out: &Path) {
    let o = run(bin().args(["simulate", "--scenario"]).arg(scenario()).arg("--out").arg(out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn error_json(o: &Output) -> Value {
    assert!(!o.status.success());
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().last().expect("stderr has an error line");
    serde_json::from_str(line).expect("error is JSON")
}

#[test]
fn swapped_logs_report_the_offending_header() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let f = dir.path().join("flights/flight01_route1_alt2m_rep1");
    let o = run(bin()
        .args(["fuse", "--scanner"])
        .arg(format!("{}_telemetry.csv", f.display()))
        .arg("--telemetry")
        .arg(format!("{}_scanner.csv", f.display()))
        .arg("--scenario")
        .arg(scenario())
        .arg("--out")
        .arg(dir.path().join("fused.csv")));
    let err = error_json(&o);
    assert_eq!(err["error"]["stage"], "fuse");
    let msg = err["error"]["message"].as_str().unwrap();
    assert!(msg.contains("alt_baro_m"), "{msg}");
    assert!(!dir.path().join("fused.csv").exists());
}

#[test]
fn fuse_writes_the_fused_schema() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let f = dir.path().join("flights/flight03_route2_alt4m_rep1");
    let out = dir.path().join("fused.csv");
    let o = run(bin()
        .args(["fuse", "--scanner"])
        .arg(format!("{}_scanner.csv", f.display()))
        .arg("--telemetry")
        .arg(format!("{}_telemetry.csv", f.display()))
        .arg("--scenario")
        .arg(scenario())
        .arg("--out")
        .arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time_s,x_m,y_m,z_m,route_id,dist_bs_m,rsrp_dbm,rsrq_db,sinr_db,rssi_dbm,leg_alt_m"
    );
    assert!(lines.count() > 100);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate(a.path());
    simulate(b.path());
    for name in ["manifest.json", "flights/plan.json", "flights/flight05_route2_alt6m_rep1_scanner.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn seed_override_changes_the_logs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    simulate(a.path());
    let o = run(bin().args(["--seed", "7", "simulate", "--scenario"]).arg(scenario()).arg("--out").arg(b.path()));
    assert!(o.status.success());
    let name = "flights/flight05_route2_alt6m_rep1_scanner.csv";
    assert_ne!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    let m: Value = serde_json::from_slice(&std::fs::read(b.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 7);
}

#[test]
fn campaign_recovers_the_bundled_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["campaign", "--scenario"]).arg(scenario()).arg("--out").arg(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&std::fs::read(dir.path().join("analysis/regression.json")).unwrap()).unwrap();
    let reg = &r["regression"];
    let sel = reg["selected"].as_u64().unwrap() as usize;
    let n = reg["family"][sel]["exponent"].as_f64().unwrap();
    assert!((n - 1.2).abs() <= 0.1, "exponent {n}");

    let c: Value = serde_json::from_slice(&std::fs::read(dir.path().join("compliance/germany.json")).unwrap()).unwrap();
    // 32 dBuV/m in 5 MHz at the 3.55 GHz carrier, rescaled to a 30 kHz resource element
    let expected = 32.0 - 20.0 * 3550.0f64.log10() - 77.2 - 10.0 * (5.0e6f64 / 30.0e3).log10();
    assert!((c["limit_dbm"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert!(c["summary"]["evaluated"].as_u64().unwrap() > 0);
    assert!(!dir.path().join("compliance/ofcom_inr.json").exists());
}

#[test]
fn unknown_scenario_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_slice(&std::fs::read(scenario()).unwrap()).unwrap();
    v["speed_kmh"] = Value::from(7.2);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
    let o = run(bin().args(["plan", "--scenario"]).arg(&path).arg("--out").arg(dir.path().join("plan.json")));
    let err = error_json(&o);
    assert!(err["error"]["message"].as_str().unwrap().contains("speed_kmh"));
}

#[test]
fn missing_limit_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let o = run(bin()
        .args(["comply", "--fused"])
        .arg(dir.path().join("nope.csv"))
        .args(["--limit", "no_such_limit"])
        .arg("--scenario")
        .arg(scenario())
        .arg("--out")
        .arg(dir.path().join("c.json")));
    error_json(&o);
}
