use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eigenstrain::axisym::{forward_stress, probe_radius, AxisymPolyField};
use eigenstrain::io::parse_profile_csv;
use eigenstrain::ElasticModel;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenstrain")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().expect("stderr line")).expect("JSON error line")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn forward_profile_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["axisym-forward", "--sample=3", "--points=17"]);
    let radius = probe_radius(3).unwrap();
    let parsed = parse_profile_csv(&dir.path().join("axisym_forward_profile.csv"), Some(radius)).unwrap();

    let scale = |v: [f64; 5]| -> Vec<f64> { v.iter().enumerate().map(|(k, x)| x / radius.powi((4 - k) as i32)).collect() };
    let e = AxisymPolyField::new(
        5,
        radius,
        scale([0.0, 0.0, 2e-3, 0.0, -5e-4]),
        scale([0.0, 0.0, 1e-3, 0.0, -5e-4]),
        scale([0.0, 0.0, 1.5e-3, 0.0, 0.0]),
    )
    .unwrap();
    let r: Vec<f64> = (0..17).map(|k| radius * k as f64 / 16.0).collect();
    let expected = forward_stress(&e, &ElasticModel::tin_bronze(), &r).unwrap();
    assert_eq!(parsed, expected);
}

#[test]
fn axisym_fit_on_noise_free_data() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["axisym-forward", "--sample=1"]);
    let input = dir.path().join("axisym_forward_profile.csv");
    run_in(dir.path(), &["axisym-fit", "--sample=1", &format!("--input={}", input.display())]);
    let rep = report(dir.path(), "axisym_fit.json");
    assert_eq!(rep["schema_version"], 1);
    assert_eq!(rep["subcommand"], "axisym-fit");
    let rel = rep["result"]["relative_residual"].as_f64().unwrap();
    assert!(rel < 1e-8, "{rel}");
    let inputs = rep["provenance"]["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 1);
    assert_eq!(inputs[0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn identical_runs_give_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("example.toml");
    let cfg = cfg.to_str().unwrap();
    for dir in [a.path(), b.path()] {
        run_in(dir, &["axisym-fit", "--config", cfg]);
        run_in(dir, &["cube-fit", "--config", cfg]);
    }
    for name in ["axisym_fit.json", "axisym_fit_model.csv", "axisym_fit_stress.svg", "cube_fit.json", "cube_fit_model.csv", "cube_fit_section_xx.svg"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn stamp_only_touches_svg() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["axisym-forward", "--stamp"]);
    let svg = std::fs::read_to_string(dir.path().join("axisym_forward_stress.svg")).unwrap();
    assert!(svg.contains("generated at unix time"));
    let csv = std::fs::read_to_string(dir.path().join("axisym_forward_profile.csv")).unwrap();
    assert!(!csv.contains("unix time"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(&["reticulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(stderr_json(&out)["error"]["exit_code"], 2);
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["axisym-forward", "--out", d, "--poisson-ratio=0.5"],
        vec!["axisym-forward", "--out", d, "--youngs-modulus-gpa=-1"],
        vec!["axisym-forward", "--out", d, "--radius-mm=0"],
        vec!["axisym-fit", "--out", d, "--sample=1"],
        vec!["axisym-forward", "--out", d, "--no-such-key=1"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_json(&out)["error"]["kind"], "usage");
    }
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "r_mm,sigma_rr_MPa,sigma_tt_MPa,sigma_zz_MPa\n0.1,1,2,3\n\n0.2,1,x,3\n").unwrap();
    let out = run(&["axisym-fit", "--out", dir.path().to_str().unwrap(), "--sample=1", &format!("--input={}", input.display())]);
    assert_eq!(out.status.code(), Some(3));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["line"], 4);

    let out = run(&["axisym-fit", "--sample=1", "--input=/nonexistent/profile.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[axisym_forward]\npionts = 3\n").unwrap();
    let out = run(&["axisym-forward", "--out", dir.path().to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&cfg, "[axisym_forward\n").unwrap();
    let out = run(&["axisym-forward", "--out", dir.path().to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cube_fit_uses_the_full_basis_on_the_section_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("example.toml");
    run_in(dir.path(), &["cube-fit", "--config", cfg.to_str().unwrap()]);
    let rep = report(dir.path(), "cube_fit.json");
    assert_eq!(rep["result"]["report"]["design_shape"], serde_json::json!([384, 24]));
    assert!(rep["result"]["relative_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn d0_fit_recovers_the_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("example.toml");
    run_in(dir.path(), &["axisym-fit-d0", "--config", cfg.to_str().unwrap()]);
    let c = &report(dir.path(), "axisym_fit_d0.json")["result"]["d0"]["coefficients_angstrom"];
    let c: Vec<f64> = c.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((c[0] - 1.09).abs() < 1e-9 && c[1].abs() < 1e-9 && (c[2] - 1.09e-4).abs() < 1e-9, "{c:?}");
}

#[test]
fn decompose_and_projections_run_on_small_meshes() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["decompose", "--n=4", "--inverse-z-order=1", "--inverse-plane-terms=2"]);
    let rep = report(dir.path(), "decompose.json");
    assert!(rep["result"]["orthogonality"].as_f64().unwrap().abs() < 1e-8);
    run_in(dir.path(), &["decompose", "--n=4", "--weight=stiffness", "--maxwell-inverse=false"]);
    assert!(report(dir.path(), "decompose.json")["result"]["orthogonality"].as_f64().unwrap().abs() < 1e-8);

    run_in(dir.path(), &["lrt-sim", "--n=4", "--pixels=6", "--directions=[[0,0,1]]"]);
    let rep = report(dir.path(), "lrt_sim.json");
    assert_eq!(rep["result"]["projections"].as_array().unwrap().len(), 1);
    let csv = std::fs::read_to_string(dir.path().join("lrt_sim_projection_0.csv")).unwrap();
    assert!(csv.starts_with("# provenance: "));
    assert_eq!(csv.lines().count(), 2 + 36);
}

#[test]
fn link_check_error_decreases_under_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["link-check", "--meshes=[8, 16]", "--rays=1000"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("rel_error"));
    let rep = report(dir.path(), "link_check.json");
    let rows = rep["result"]["rows"].as_array().unwrap();
    let err: Vec<f64> = rows.iter().map(|r| r["relative_error"].as_f64().unwrap()).collect();
    assert!(err[1] < err[0], "{err:?}");
    assert!(err[1] < 0.05);
    assert!(rep["warnings"].as_array().unwrap().is_empty());
}
