use serde_json::Value;
use std::process::{Command, Output};

fn reglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reglab"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is JSON")
}

fn re(v: &Value) -> f64 {
    v["re"].as_str().unwrap().parse().unwrap()
}

#[test]
fn dilog_at_one_half() {
    let o = reglab(&["dilog", "--z", "0.5"]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    let ln2 = 2f64.ln();
    let want = std::f64::consts::PI.powi(2) / 12.0 - ln2 * ln2 / 2.0;
    assert!((re(&v["result"]["li2"]) - want).abs() < 1e-14);
    assert_eq!(v["seed"], 0);
}

#[test]
fn bloch_wigner_vanishes_at_one() {
    let v = stdout_json(&reglab(&["dilog", "--z", "1+0i"]));
    assert_eq!(v["result"]["bloch_wigner"].as_f64(), Some(0.0));
}

#[test]
fn malformed_complex_is_a_usage_error() {
    let o = reglab(&["dilog", "--z", "1+x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kronecker_three_routes_and_two_torsion() {
    let v = stdout_json(&reglab(&[
        "kronecker",
        "--u",
        "0.142857142857142857+0.285714285714285714i",
    ]));
    let res = v["result"]["residuals"].as_array().unwrap();
    assert_eq!(res.len(), 3);
    let v = stdout_json(&reglab(&["kronecker", "--u", "0.5"]));
    assert!(re(&v["result"]["continued"]).abs() < 1e-12);
}

#[test]
fn kronecker_pole_is_structured() {
    let o = reglab(&["kronecker", "--s", "1", "--x", "0.3+0.1i", "--a", "0"]);
    assert!(!o.status.success());
    let e = stderr_json(&o);
    assert_eq!(e["stage"], "kronecker");
    assert!(e["message"].as_str().unwrap().contains("pole"));
}

#[test]
fn check_suites() {
    let o = reglab(&["check", "distribution"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["passed"], true);
    let o = reglab(&["check", "nope"]);
    assert!(!o.status.success());
    assert_eq!(stderr_json(&o)["stage"], "config");
    let a = reglab(&["check", "laplace", "--seed", "7"]);
    let b = reglab(&["check", "laplace", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["seed"], 7);
}

#[test]
fn hecke_l_matches_direct_sum() {
    let v = stdout_json(&reglab(&[
        "heckeL",
        "--modulus",
        "3",
        "--norm-bound",
        "40000",
    ]));
    for c in v["result"]["classes"].as_array().unwrap() {
        assert!(c["relative_error"].as_f64().unwrap() < 1e-3);
    }
}

#[test]
fn stark_report_is_reproducible() {
    let dir = std::env::temp_dir();
    let (p1, p2) = (
        dir.join("reglab_cli_r1.json"),
        dir.join("reglab_cli_r2.json"),
    );
    for p in [&p1, &p2] {
        let o = reglab(&[
            "stark",
            "configs/qi_mod3.json",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert!(v["residuals"]["a_conjugation"].as_f64().unwrap() < 1e-8);
    assert!(v["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn stark_dry_run_and_missing_field() {
    let o = reglab(&["stark", "configs/qi_mod3.json", "--dry-run"]);
    assert!(o.status.success());
    assert_eq!(
        stdout_json(&o)["ray_class_structure"],
        serde_json::json!([2])
    );
    let path = std::env::temp_dir().join("reglab_cli_bad.json");
    std::fs::write(&path, r#"{"D": -4, "phi_fin_index": 0}"#).unwrap();
    let o = reglab(&["stark", path.to_str().unwrap()]);
    assert!(!o.status.success());
    let e = stderr_json(&o);
    assert_eq!(e["stage"], "config");
    assert!(e["message"].as_str().unwrap().contains("modulus"));
}

#[test]
fn settings_out_of_bounds_are_rejected() {
    let o = reglab(&["dilog", "--z", "0.5", "--tol", "1e-20"]);
    assert!(!o.status.success());
    assert_eq!(stderr_json(&o)["stage"], "config");
}
