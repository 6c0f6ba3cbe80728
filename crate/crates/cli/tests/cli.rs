//! End-to-end tests of the `cym` binary: output contents, exit codes,
//! config-file merging, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn cym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON report")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("cym-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn profile_csv_exports_known_row() {
    let out = cym(&["profile", "--n", "1", "--k", "1", "--lambda", "-2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "r,Z,W,phi,phi_prime,Y,ode_residual,phi_ode_residual"
    );
    assert_eq!(text.lines().count(), 1002);
    // row at r = 0.5: Z = 0.75, phi = 0.75
    let row: Vec<f64> = text
        .lines()
        .nth(501)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((row[0] - 0.5).abs() < 1e-15);
    assert!((row[1] - 0.75).abs() < 1e-9, "Z = {}", row[1]);
    assert!((row[3] - 0.75).abs() < 1e-9, "phi = {}", row[3]);
    // last row carries the boundary data phi'(1) = -2 and Y = inf
    let last = text.lines().nth(1001).unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    assert!((cells[4].parse::<f64>().unwrap() + 2.0).abs() < 1e-9);
    assert_eq!(cells[5], "inf");
}

#[test]
fn profile_eigs_flag_and_boundary_derivative() {
    let out = cym(&["profile", "--n", "1", "--k", "2", "--eigs", "-1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last: Vec<f64> = text
        .lines()
        .nth(1001)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap_or(f64::INFINITY))
        .collect();
    assert!((last[4] + 2.0).abs() < 1e-9, "phi'(1) = {}", last[4]);
}

#[test]
fn profile_usage_errors() {
    // n = 0 fails EigenSpec validation
    let out = cym(&["profile", "--n", "0", "--k", "1", "--lambda", "-2"]);
    assert_eq!(out.status.code(), Some(1));
    // lambda and eigs conflict
    let out = cym(&[
        "profile", "--n", "1", "--k", "1", "--lambda", "-2", "--eigs", "-2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // missing eigenvalues entirely
    let out = cym(&["profile", "--n", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    // eigenvalue ≥ 1 cannot be solved: solver-level failure
    let out = cym(&["profile", "--n", "1", "--k", "1", "--lambda", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rationality_reports() {
    let out = cym(&["rationality", "--n", "1", "--k", "1", "--lambda", "-2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["is_rational"], true);
    assert!(v["closed_form_sup_gap"].as_f64().unwrap() <= 1e-8);
    assert!(v["c"].as_f64().unwrap().abs() < 1e-12);

    let out = cym(&["rationality", "--n", "1", "--k", "1", "--lambda", "-1.5"]);
    let v = json(&out);
    assert_eq!(v["is_rational"], false);
    assert!(v.get("closed_form_sup_gap").is_none());

    let out = cym(&["rationality", "--n", "3", "--k", "2", "--lambda", "-2"]);
    let v = json(&out);
    assert_eq!(v["is_rational"], true);
}

#[test]
fn verify_ma_passes_and_embeds_config() {
    let out = cym(&[
        "verify-ma", "--model", "egg", "--n", "1", "--k", "1", "--p", "1", "--points", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["passed"], true);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["model"], "egg(n=1,k=1,p=1)");
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
}

#[test]
fn verify_ma_deterministic_across_threads() {
    let args = [
        "verify-ma", "--model", "egg", "--n", "1", "--k", "2", "--p", "2", "--points", "6",
        "--seed", "42",
    ];
    let once = stdout(&cym(&args));
    let twice = stdout(&cym(&args));
    assert_eq!(once, twice, "same config + seed must be byte-identical");
    let threaded = stdout(&cym(&[&args[..], &["--threads", "3"]].concat()));
    // thread count must not change the report payload
    let strip = |s: &str| s.replace("\"threads\": \"3\"", "\"threads\": \"1\"");
    assert_eq!(strip(&threaded), strip(&once));
}

#[test]
fn verify_ma_measured_base_data() {
    let out = cym(&[
        "verify-ma", "--model", "egg", "--n", "1", "--k", "2", "--p", "2", "--points", "4",
        "--base-data", "fd",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["base_data"], "measured-fd");
    assert_eq!(v["threshold"], 1e-3);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn profile_json_format() {
    let out = cym(&[
        "profile", "--n", "1", "--k", "1", "--lambda", "-2", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1001);
    assert!((rows[500]["z"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    // serde_json renders the infinite Y at r = 1 as null
    assert!(rows[1000]["y"].is_null());
}

#[test]
fn bundle_check_reports() {
    let out = cym(&["bundle-check", "--model", "sum-disk", "--powers", "1,2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["split_residual"].as_f64().unwrap() >= 0.4);
    assert_eq!(v["consistency_passed"], true);
    assert_eq!(v["griffiths"]["negative_evidence"], true);

    let out = cym(&["bundle-check", "--model", "disk", "--power", "1"]);
    let v = json(&out);
    assert!(v["split_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["ricci"]["constant"], true);
    let eig = v["ricci"]["eigenvalues"][0][0].as_f64().unwrap();
    assert!((eig + 2.0).abs() < 1e-4);

    // the flat model has no induced metric; reported, not fatal
    let out = cym(&["bundle-check", "--model", "flat"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v.get("induced_metric_error").is_some());
}

#[test]
fn bundle_check_potential_json() {
    let path = tmp_path("potential.json");
    // log H = |z|²: flat base metric with zero Ricci eigenvalue
    std::fs::write(
        &path,
        r#"{"n": 1, "k": 1, "terms": [{"i_multi": [1], "j_multi": [1], "re": 1.0, "im": 0.0}]}"#,
    )
    .unwrap();
    let out = cym(&[
        "bundle-check", "--model", "potential", "--json", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["consistency_passed"], true);
    let eig = v["ricci"]["eigenvalues"][0][0].as_f64().unwrap();
    assert!(eig.abs() < 1e-4, "flat potential should have zero Ricci, got {eig}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn config_file_merging() {
    let cfg_path = tmp_path("config.txt");
    std::fs::write(&cfg_path, "n=1\nk=1\nlambda=-2\n").unwrap();
    let out = cym(&["rationality", "--config", cfg_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["is_rational"], true);

    // explicit flags override the file
    let out = cym(&[
        "rationality",
        "--config",
        cfg_path.to_str().unwrap(),
        "--lambda",
        "-1.5",
    ]);
    assert_eq!(json(&out)["is_rational"], false);
    std::fs::remove_file(&cfg_path).ok();
}

#[test]
fn out_flag_and_io_failure() {
    let path = tmp_path("report.json");
    let out = cym(&[
        "rationality", "--n", "1", "--k", "1", "--lambda", "-2", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"is_rational\": true"));
    std::fs::remove_file(&path).ok();

    let out = cym(&[
        "rationality", "--n", "1", "--k", "1", "--lambda", "-2", "--out",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn selftest_exits_clean() {
    let out = cym(&["selftest"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0 failed"));
    assert!(!text.contains("FAIL"));
}
