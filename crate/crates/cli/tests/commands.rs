use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn petty(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_petty"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const BALL: &str = r#"{"n":3,"L_max":0,"coeffs":[{"k":0,"l":1,"c":3.5449077018110318}]}"#;

#[test]
fn verify_rejects_low_dimension() {
    let out = petty(&["verify", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must be ≥ 3"));
}

#[test]
fn verify_rejects_coarse_grid() {
    let out = petty(&["verify", "--lmax", "16", "--grid", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid too coarse"));
}

#[test]
fn unknown_flags_are_usage_errors() {
    assert_eq!(petty(&["petty", "--bogus"]).status.code(), Some(2));
    assert_eq!(petty(&["petty"]).status.code(), Some(2));
}

#[test]
fn petty_of_the_unit_ball() {
    let out = petty(&["petty", "--ellipsoid", "diag(1,1,1)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let report = &v["report"];
    assert!((report["petty"].as_f64().unwrap() - 3.0 * PI * PI / 4.0).abs() <= 1e-10);
    assert!(report["residual_sup"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["command"], "petty");
}

#[test]
fn petty_is_affine_invariant_through_the_cli() {
    let ball = json(&petty(&["petty", "--ellipsoid", "diag(1,1,1)"]));
    let tilted = json(&petty(&["petty", "--ellipsoid", "[[1.1,0.1,0],[0,0.9,0.05],[0,0,1.2]]"]));
    let a = ball["report"]["petty"].as_f64().unwrap();
    let b = tilted["report"]["petty"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-7 * a);
}

#[test]
fn deficit_of_a_ball_vanishes() {
    let dir = std::env::temp_dir().join(format!("petty-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ball.json");
    std::fs::write(&path, BALL).unwrap();
    let out = petty(&["deficit", "--body", path.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["report"]["lhs"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(v["report"]["rhs"].as_f64().unwrap(), 0.0);
    assert_eq!(v["report"]["equality_case"], true);
    assert_eq!(v["report"]["seed"], 11);
}

#[test]
fn spectrum_has_kernel_row_at_degree_two() {
    let out = petty(&["spectrum", "--n", "3", "--m", "1", "--lmax", "8", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,k,radon,cosine,box,mu_dym,lambda_L"));
    let row2: Vec<&str> = lines.nth(2).unwrap().split(',').collect();
    assert_eq!(row2[1], "2");
    assert_eq!(row2[5].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row2[6].parse::<f64>().unwrap(), 0.0);
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn outputs_are_byte_stable() {
    for args in [
        &["spectrum", "--lmax", "12"][..],
        &["petty", "--ellipsoid", "diag(1,1.2,0.9)", "--lmax", "12"][..],
        &["deficit", "--body", BALL, "--lmax", "8"][..],
    ] {
        let a = petty(args);
        let b = petty(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn nonconvex_body_exits_three() {
    let body = r#"{"n":3,"L_max":4,"coeffs":[{"k":0,"l":1,"c":3.5449},{"k":4,"l":1,"c":2.0}]}"#;
    let out = petty(&["petty", "--body", body]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("node") && err.contains("not convex"));
}

#[test]
fn singular_ellipsoid_exits_three() {
    assert_eq!(petty(&["petty", "--ellipsoid", "diag(1,0,1)"]).status.code(), Some(3));
}

#[test]
fn malformed_bodies_exit_two() {
    assert_eq!(petty(&["petty", "--body", "{not json"]).status.code(), Some(2));
    assert_eq!(petty(&["petty", "--ellipsoid", "diag(1,2)"]).status.code(), Some(2));
    assert_eq!(petty(&["petty", "--body", "/nonexistent/body.json"]).status.code(), Some(2));
    let high = r#"{"n":3,"L_max":10,"coeffs":[{"k":0,"l":1,"c":3.5},{"k":10,"l":1,"c":1e-4}]}"#;
    assert_eq!(petty(&["petty", "--body", high, "--lmax", "8"]).status.code(), Some(2));
}

#[test]
fn iterate_output_feeds_back_as_a_body() {
    let dir = std::env::temp_dir().join(format!("petty-iter-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pi.json");
    let out = petty(&[
        "iterate", "--ellipsoid", "diag(1,1.1,0.9)", "--lmax", "12", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let again = petty(&["petty", "--body", path.to_str().unwrap(), "--lmax", "12"]);
    assert_eq!(again.status.code(), Some(0));
    // ΠE is again an ellipsoid, so its Petty value is the ball's.
    let p = json(&again)["report"]["petty"].as_f64().unwrap();
    assert!((p - 3.0 * PI * PI / 4.0).abs() <= 1e-6);
}

#[test]
fn verify_writes_report_and_exits_zero() {
    let dir = std::env::temp_dir().join(format!("petty-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = petty(&["verify", "--n", "3", "--lmax", "16", "--seed", "7", "--out", path.to_str().unwrap()]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{stderr}");
    assert_eq!(stderr.lines().filter(|l| l.starts_with("[PASS]")).count(), 11);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["report"]["all_passed"], true);
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["report"]["criteria"].as_array().unwrap().len(), 11);
}
