use std::process::{Command, Output};

use serde_json::Value;

fn qstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qstar"))
        .args(args)
        .env_remove("QSTAR_ORDER")
        .output()
        .expect("failed to run qstar")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn coeffs(v: &Value) -> Vec<f64> {
    v["coeffs"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect()
}

#[test]
fn qcg_csv_table_for_two_doublets() {
    let o = qstar(&["qcg", "--j1", "1/2", "--j2", "1/2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "j1,j2,j,m1,m2,m,value");
    assert_eq!(lines.len(), 7);
    let singlet: Vec<f64> = lines[1..]
        .iter()
        .filter(|l| l.split(',').nth(2) == Some("0"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(singlet.len(), 2);
    assert!((singlet[0] + s).abs() < 1e-12 && (singlet[1] - s).abs() < 1e-12);
}

#[test]
fn qcg_trivial_factor_is_identity() {
    let o = qstar(&["qcg", "--j1", "0", "--j2", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for e in entries {
        assert_eq!(e["m"], e["m2"]);
        assert!((e["value"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn qcg_deformed_has_series_columns() {
    let o = qstar(&["qcg", "--j1", "1/2", "--j2", "1/2", "--deformed", "--order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("j1,j2,j,m1,m2,m,h^0,h^1,h^2,h^3\n"));
}

#[test]
fn malformed_spin_exits_2() {
    let o = qstar(&["qcg", "--j1", "x", "--j2", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));
}

#[test]
fn star_plane_commutation_relation() {
    let xy = json(&qstar(&["star", "--space", "plane", "--expr", "x * y", "--order", "2"]));
    let yx = json(&qstar(&["star", "--space", "plane", "--expr", "y * x", "--order", "2"]));
    assert_eq!(xy["expansion"].as_array().unwrap().len(), 3);
    let a = coeffs(&xy["element"]["terms"][0]["coeff"]);
    let b = coeffs(&yx["element"]["terms"][0]["coeff"]);
    // x⋆y = q y⋆x with q = 1 + ħ + ħ²/2
    let q = [1.0, 1.0, 0.5];
    for k in 0..3 {
        let qb: f64 = (0..=k).map(|i| q[i] * b[k - i]).sum();
        assert!((a[k] - qb).abs() < 1e-12);
    }
}

#[test]
fn star_unit_is_exact() {
    let v = json(&qstar(&["star", "--space", "plane", "--expr", "1 * y"]));
    let terms = v["element"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!((terms[0]["j2"].as_i64(), terms[0]["m2"].as_i64()), (Some(1), Some(1)));
    assert_eq!(coeffs(&terms[0]["coeff"])[1..], [0.0; 6]);
    assert_eq!(v["expansion"][0]["poly"], "y");
}

#[test]
fn star_minkowski_is_braided() {
    let v = json(&qstar(&["star", "--space", "minkowski", "--expr", "x2 * x1", "--order", "2"]));
    assert_ne!(v["expansion"][1]["poly"], "0");
    let e = json(&qstar(&["star", "--space", "euclid", "--expr", "x2 * x1", "--order", "2"]));
    assert_eq!(e["expansion"][1]["poly"], "0");
}

#[test]
fn star_bidiff_slice() {
    let o = qstar(&["star", "--expr", "x * y", "--bidiff", "1", "--order", "3", "--format", "text"]);
    assert_eq!(stdout(&o), "ħ^1: 0.5*x*y\n");
    assert_eq!(qstar(&["star", "--expr", "x * y", "--bidiff", "4", "--order", "3"]).status.code(), Some(2));
}

#[test]
fn star_error_exit_codes() {
    assert_eq!(qstar(&["star", "--expr", "x * (y"]).status.code(), Some(2));
    assert_eq!(qstar(&["star", "--expr", "x * y * x"]).status.code(), Some(2));
    assert_eq!(qstar(&["star", "--space", "plane", "--expr", "x1 * y"]).status.code(), Some(3));
    assert_eq!(qstar(&["star", "--space", "euclid", "--expr", "x * y1"]).status.code(), Some(3));
}

#[test]
fn order_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qstar"))
        .args(["star", "--expr", "x*y", "--format", "text"])
        .env("QSTAR_ORDER", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "ħ^0: x*y\nħ^1: 0.5*x*y\n");
}

#[test]
fn twist_reports_residuals() {
    let v = json(&qstar(&["twist", "--j1", "1/2", "--j2", "1", "--order", "4"]));
    for g in ["E", "F", "K"] {
        assert!(v["intertwining_residuals"][g].as_f64().unwrap() < 1e-9);
    }
    assert!(v["inverse_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(qstar(&["twist", "--j1", "1/2", "--j2", "1/2", "--eta", "1/2:1/2=1"]).status.code(), Some(2));
}

#[test]
fn verify_cgc_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = qstar(&["verify", "--suite", "cgc", "--max-spin", "2", "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["suite"], "cgc");
    assert_eq!(report["summary"]["passed"], report["summary"]["total"]);
    assert!(report["summary"]["max_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn verify_plane_passes() {
    let o = qstar(&["verify", "--suite", "plane", "--max-spin", "3/2", "--order", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_with_zero_tolerance_fails() {
    assert_eq!(qstar(&["verify", "--suite", "plane", "--tol", "0", "--max-spin", "1"]).status.code(), Some(1));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for p in &paths {
        let o =
            qstar(&["verify", "--suite", "twist", "--max-spin", "1", "--order", "4", "--report", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn verify_bad_flags_exit_2() {
    assert_eq!(qstar(&["verify", "--suite", "everything"]).status.code(), Some(2));
    assert_eq!(qstar(&["verify", "--max-spin", "a/b"]).status.code(), Some(2));
}
