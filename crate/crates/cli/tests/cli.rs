use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lksmult")).args(args).env("LKSMULT_THREADS", "2").output().expect("spawn lksmult")
}

fn result(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert_eq!(v["tool"], "lksmult");
    assert!(v["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    v["result"].clone()
}

#[test]
fn power_weight_is_integrable() {
    let r = result(&["weight", "--kind", "lks-power", "--alpha", "0.5"]);
    assert_eq!(r["integrable"], true);
    assert!(r["note"].is_null());
    assert!(r["max_table_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn single_coefficient_weight_has_trivial_algebra() {
    let r = result(&["weight", "--kind", "lks-table", "--c", "1"]);
    assert_eq!(r["integrable"], false);
    assert!(r["note"].as_str().unwrap().contains("constants only"));
}

#[test]
fn malformed_input_exits_2() {
    for args in [
        &["weight", "--kind", "nope"][..],
        &["weight", "--kind", "lks-table"][..],
        &["weight", "--alpha", "-1"][..],
        &["weight", "--grid-log2", "40"][..],
        &["polygon", "--angles", "1/0"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn empty_set_exits_2() {
    assert_eq!(run(&["capacity"]).status.code(), Some(2));
    assert_eq!(run(&["capacity", "--set", "40"]).status.code(), Some(2));
}

#[test]
fn single_point_capacity_matches_reciprocal_mean() {
    let r = result(&["capacity", "--kind", "riesz", "--alpha", "0.5", "--set", "0", "--grid-log2", "18"]);
    assert!(r["solver_gap"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["truncated"], false);
    assert!(r["violations"].as_array().unwrap().is_empty());
    let cap = r["value"].as_f64().unwrap();
    let c = lksmult::CoeffSeq::riesz(0.5).unwrap();
    let p = cap * lksmult::weights::reciprocal_quadrature(&c, 1 << 18).unwrap();
    assert!((p - 1.0).abs() < 0.02, "{p}");
}

#[test]
fn boundary_set_is_flagged() {
    let r = result(&["capacity", "--set", "30,32"]);
    assert_eq!(r["truncated"], true);
    let r = result(&["capacity", "--set", "-2,3"]);
    assert_eq!(r["truncated"], false);
}

#[test]
fn rotation_is_not_a_multiplier() {
    let r = result(&["mult", "--family", "rotation", "--angle", "1"]);
    assert_eq!(r["passes"], false);
    let w = r["witness"].as_array().unwrap();
    assert_eq!(w[0], 0);
    assert!(r["scan"]["growth_per_octave"].as_f64().unwrap() > 1.5);
}

#[test]
fn constant_multiplier_passes_with_its_modulus() {
    let r = result(&["mult", "--family", "constant", "--re", "2", "--im", "-1"]);
    assert_eq!(r["passes"], true);
    assert!(r["witness"].is_null());
    let norm = r["window"]["norm"].as_f64().unwrap();
    assert!((norm - 5f64.sqrt()).abs() < 1e-9, "{norm}");
}

#[test]
fn decomposition_thresholds() {
    let above = result(&["decompose", "--family", "power-rotation", "--delta", "0.25"]);
    let below = result(&["decompose", "--family", "power-rotation", "--delta", "0.15"]);
    assert_eq!(above["passes"], true);
    assert_eq!(below["passes"], false);
    assert_eq!(below["cond5"]["bounded"], false);
}

#[test]
fn polygon_and_spectra_reports() {
    let p = result(&["polygon", "--angles", "0,1/4,1/2,3/4", "--composite"]);
    assert_eq!(p["structure"]["d_s"], 4);
    assert!((p["composite"]["ratio_min"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let s = result(&["spectra", "--ns", "16,32", "--z", "0:0,3:0"]);
    assert_eq!(s["probes"][0]["winding"], 1);
    assert_eq!(s["probes"][1]["winding"], 0);
    let rows = s["probes"][0]["rows"].as_array().unwrap();
    assert!(rows[1]["value"].as_f64().unwrap() < rows[0]["value"].as_f64().unwrap());
}

#[test]
fn config_file_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"capacity\"\nwindow = 16\n[capacity]\nset = [0, 1]\n").unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("x.csv");
    let args = ["capacity", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()];
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["window"], 16);
    assert_eq!(v["result"]["j_set"], serde_json::json!([0, 1]));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,x"));
    assert_eq!(lines.count(), 33);
    let again = dir.path().join("again.json");
    let o = run(&["capacity", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "windw = 3\n").unwrap();
    assert_eq!(run(&["weight", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
