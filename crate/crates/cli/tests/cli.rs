use std::process::{Command, Output};

use serde_json::Value;

fn gjms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gjms")).args(args).env_remove("GJMS_OUT_DIR").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn constants_report_minus_pi_squared() {
    let out = gjms(&["constants", "--n", "1", "--m", "1"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["summary"]["closedForm"], "-pi^2");
    let x = v["summary"]["value"].as_f64().unwrap();
    assert!((x + std::f64::consts::PI.powi(2)).abs() < 1e-12);
    for key in ["n", "m", "L", "seed", "version"] {
        assert!(v["provenance"].get(key).is_some(), "missing provenance field {key}");
    }
}

#[test]
fn hessian_csv_has_negative_row() {
    let out = gjms(&["hessian", "--n", "1", "--m", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "2,-315,16,negative"), "{text}");
}

#[test]
fn counterexample_is_finite_and_negative() {
    let v = json_of(&gjms(&["counterexample-sin"]));
    let e = v["summary"]["energy"].as_f64().unwrap();
    assert!((e + 15.0 * std::f64::consts::PI / 16.0).abs() < 1e-10);
    assert_eq!(v["summary"]["negative"], true);
    assert_eq!(v["summary"]["finite"], true);
}

#[test]
fn invalid_configuration_exits_2() {
    assert_eq!(gjms(&["energy", "--n", "3", "--m", "1"]).status.code(), Some(2));
    assert_eq!(gjms(&["energy", "--n", "1", "--m", "1", "-L", "4"]).status.code(), Some(2));
    assert_eq!(gjms(&["minimize", "--n", "1", "--m", "1", "--start", "nope"]).status.code(), Some(2));
    assert_eq!(gjms(&["flat-identity-check", "--m", "3"]).status.code(), Some(2));
}

#[test]
fn unfinished_descent_exits_3() {
    let out = gjms(&["minimize", "--n", "1", "--m", "3", "--start", "h2", "--max-iter", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_of(&out);
    assert_eq!(v["status"], "non-convergence");
    assert_eq!(v["summary"]["monotone"], true);
}

#[test]
fn reports_are_deterministic() {
    let args = ["invariance-check", "--n", "1", "--m", "2", "--trials", "3", "--seed", "5", "--format", "csv"];
    let a = gjms(&args);
    let b = gjms(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_gjms"))
        .args(["poly-identity", "--n", "2", "--m", "1", "--trials", "3"])
        .env("GJMS_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("poly-identity.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["provenance"]["seed"], 0);
    assert_eq!(v["summary"]["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn explicit_out_wins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = gjms(&["multiplier-table", "--n", "1", "--m", "2", "-L", "3", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    // p_4(0) = 9/16 on S^1
    assert!(text.lines().nth(1).unwrap().starts_with("0,9,16,"));
}

#[test]
fn green_ratio_is_constant() {
    let out = gjms(&["green-check", "--series-degree", "8192"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!(v["summary"]["reproductionError"].as_f64().unwrap() < 1e-8);
    assert!(v["summary"]["ratioSpread"].as_f64().unwrap() < 1e-6);
}

#[test]
fn flat_identity_passes() {
    let out = gjms(&["flat-identity-check", "--m", "1", "--trials", "5"]);
    assert!(out.status.success());
    let v = json_of(&out);
    let g = &v["summary"]["golden"];
    assert!((g["flatEnergy"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-8);
}
