use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_euler-lagrange"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{}-{name}", std::process::id()))
}

#[test]
fn family_csv() {
    let out = run(&[
        "family",
        "--r2-min",
        "0",
        "--r2-max",
        "3",
        "--samples",
        "4",
        "-q",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r2,r3,p_residual"));
    assert!(lines.next().unwrap().starts_with("0,1,"));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    assert!((rows[2][1] - 3.747_142_166_64).abs() < 1e-9);
    assert!(rows.iter().all(|r| r[2].abs() <= 1e-9));
}

#[test]
fn family_rejects_bad_ranges() {
    assert_eq!(
        run(&["family", "--r2-min", "2", "--r2-max", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["family", "--samples", "1"]).status.code(), Some(2));
    assert_eq!(run(&["family", "--r2-min", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["family", "--bogus"]).status.code(), Some(2));
}

#[test]
fn envelope_shape() {
    let v = json(&["es", "--r2", "2", "--m3", "1", "-q"]);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "es");
    assert_eq!(v["inputs"]["r2"], 2.0);
    assert!((v["results"]["m1"].as_f64().unwrap() - 20.948_397_394_1).abs() < 1e-8);
    assert!(v["residuals"]["max_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn es_out_of_range_mass_is_a_usage_error() {
    let out = run(&["es", "--r2", "2", "--m3", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m3"));
}

#[test]
fn el_reproduces_centre_fixed_points() {
    let v = json(&["el", "--r2", "0", "--m3", "0.8", "-q"]);
    let points = v["results"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 6);
    let find = |k: &str| points.iter().find(|p| p["klass"] == k).unwrap();
    let r4 = |k: &str| find(k)["r4"].as_f64().unwrap();
    assert!((r4("CollinearOuterRight") - 1.7576).abs() < 1e-3);
    assert!((r4("CollinearOuterLeft") + 1.7576).abs() < 1e-3);
    assert!((r4("CollinearInner") - 0.494_666_491).abs() < 1e-8);
    assert!((r4("CollinearMiddle") + 0.494_666_491).abs() < 1e-8);
    assert!((find("TriangularUpper")["r5"].as_f64().unwrap() - 1.139_428_224_956_2).abs() < 1e-12);
    assert!((find("TriangularLower")["r5"].as_f64().unwrap() + 1.139_428_224_956_2).abs() < 1e-12);
    assert_eq!(v["residuals"]["eq_residuals"].as_array().unwrap().len(), 6);
}

#[test]
fn el_rejects_endpoint_mass() {
    assert_eq!(
        run(&["el", "--r2", "2", "--m3", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn lagrange_json() {
    let v = json(&["lagrange", "--x", "2", "-q"]);
    assert!((v["results"]["l1"].as_f64().unwrap() + 0.712_25).abs() < 1e-4);
    assert_eq!(v["residuals"]["eq_residuals"].as_array().unwrap().len(), 5);
    assert_eq!(run(&["lagrange", "--x", "0"]).status.code(), Some(2));
}

#[test]
fn lagrange_refuses_csv() {
    assert_eq!(
        run(&["lagrange", "--x", "2", "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn curve_csv() {
    let text = stdout(&run(&["curve", "--r2", "2", "--step", "0.05", "-q"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r4,r5,m3_common,physical"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 50);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 4);
        assert!(cells[3] == "0" || cells[3] == "1");
    }
}

#[test]
fn param_csv() {
    let text = stdout(&run(&[
        "param",
        "--w-min",
        "0",
        "--w-max",
        "3",
        "--samples",
        "7",
        "-q",
    ]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("w,G,r3,p_residual"));
    assert!(lines.next().unwrap().starts_with("0,0,1,"));
    let single = stdout(&run(&["param", "--w", "1", "-q"]));
    assert_eq!(single.lines().count(), 2);
    assert_eq!(
        run(&["param", "--w", "1", "--samples", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_off_equilibrium_probe_is_data() {
    let v = json(&[
        "verify", "--r2", "2", "--m3", "1", "--r4", "10", "--r5", "10", "-q",
    ]);
    assert!(v["residuals"]["max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn verify_integration_reports_drift() {
    let v = json(&[
        "verify",
        "--r2",
        "2",
        "--m3",
        "1",
        "--integrate",
        "--dt-div",
        "512",
        "-q",
    ]);
    let drift = &v["residuals"]["drift"];
    assert!(drift["radius_drift"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["results"]["integration"]["steps"], 512);
}

#[test]
fn verify_round_trip_is_bit_exact() {
    let path = scratch("es.json");
    let out = run(&[
        "es",
        "--r2",
        "2",
        "--m3",
        "3",
        "--out",
        path.to_str().unwrap(),
        "-q",
    ]);
    assert!(out.status.success());
    let direct = json(&["verify", "--r2", "2", "--m3", "3", "-q"]);
    let reread = json(&["verify", "--from-json", path.to_str().unwrap(), "-q"]);
    assert_eq!(direct["residuals"], reread["residuals"]);
    assert_eq!(direct["results"]["solution"], reread["results"]["solution"]);
    let _ = std::fs::remove_file(path);
}

#[test]
fn verify_from_json_rejects_forged_masses() {
    let path = scratch("forged.json");
    std::fs::write(
        &path,
        r#"{"r2": 2.0, "r3": 3.747142166640987, "m1": 1.0, "m2": 1.0, "m3": 1.0}"#,
    )
    .unwrap();
    let out = run(&["verify", "--from-json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(path);
}

#[test]
fn output_is_deterministic() {
    let args = ["el", "--r2", "1.5", "--m3", "2", "-q"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stderr.is_empty());
}

#[test]
fn timing_line_goes_to_stderr() {
    let out = run(&["lagrange", "--x", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lagrange: done"));
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok());
}

#[test]
fn tol_is_echoed_and_validated() {
    let v = json(&["el", "--r2", "2", "--m3", "1", "--tol", "1e-11", "-q"]);
    assert_eq!(v["inputs"]["tol"], 1e-11);
    assert_eq!(
        run(&["el", "--r2", "2", "--m3", "1", "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
}
