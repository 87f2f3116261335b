//! End-to-end runs of the `loewner` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loewner::io::{read_chain_jsonl, read_energy_csv};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner")).args(args).output().expect("spawn loewner")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

/// Exactly one diagnostic line carrying the given code.
fn assert_diagnostic(o: &Output, code: &str) {
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error code={code} message=\"")), "{err}");
}

const COS_DENSITY: &str = r#"{"kind": "smooth_density", "keyframes": [{"t": 0.0, "density": {"K": 1, "nu_hat": [[2.0, 0.0], [0.5, 0.0]]}}]}"#;

#[test]
fn constant_unit_evolve_reaches_e() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", r#"{"driver": {"kind": "constant_unit"}, "t_end": 1.0}"#);
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "evolve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let states = read_chain_jsonl(&out.join("chain.jsonl")).unwrap();
    let last = states.last().unwrap();
    assert_eq!(last.t, 1.0);
    assert!((last.f.a1() - std::f64::consts::E).abs() < 1e-8);
    assert!(last.f.coefficients()[1..].iter().all(|a| a.norm() == 0.0));
}

#[test]
fn laplacian_growth_frames_are_concentric_circles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.json",
        r#"{"driver": {"kind": "laplacian_growth"}, "t_end": 0.5, "times": [0.1, 0.2, 0.3, 0.4], "outputs": ["chain", "plots"]}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "evolve"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let states = read_chain_jsonl(&out.join("chain.jsonl")).unwrap();
    assert_eq!(states.len(), 6);
    assert_eq!(states[0].t, 0.0);
    for s in &states {
        assert!((s.f.a1() - s.t.exp()).abs() < 1e-8);
        assert!(s.f.coefficients()[1..].iter().all(|a| a.norm() < 1e-8), "t = {}", s.t);
    }
    assert!(out.join("boundary.svg").exists());
    assert!(out.join("frame_000.svg").exists());
    let plot = run(&["--out", out.to_str().unwrap(), "plot", "--check-nesting", out.join("chain.jsonl").to_str().unwrap()]);
    assert!(plot.status.success(), "{}", stderr(&plot));
    assert!(fs::read_to_string(out.join("chain_boundary.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn verify_theorem1_headline_sweep_passes_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let json = format!(
        r#"{{"driver": {COS_DENSITY}, "t_end": 0.5, "times": [0.1, 0.2, 0.3, 0.4, 0.5], "outputs": ["energy", "theorem1"]}}"#
    );
    let cfg = write_config(dir.path(), "run.json", &json);
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "verify-theorem1"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let rows = read_energy_csv(&out.join("energy.csv")).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.residual < 1e-4));
        files.push((fs::read(out.join("energy.csv")).unwrap(), fs::read(out.join("theorem1.json")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn residual_above_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let json = format!(r#"{{"driver": {COS_DENSITY}, "t_end": 0.2}}"#);
    let cfg = write_config(dir.path(), "run.json", &json);
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tolerance", "1e-14", "verify-theorem1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_diagnostic(&o, "residual_exceeded");
    assert!(stderr(&o).contains(" t="));
}

#[test]
fn broken_density_exits_two_before_integration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"driver": {"kind": "smooth_density", "keyframes": [{"t": 0.0, "density": {"K": 1, "nu_hat": [[1.5, 0.0], [0.2, 0.0]]}}]}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "verify-theorem1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("normaliz"), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(!out.exists());
}

#[test]
fn invalid_config_values_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for (i, bad) in [r#"{"N": 4}"#, r#"{"dt": -1.0}"#, r#"{"fd_step": 1.0}"#, r#"{"unknown": 1}"#, "not json"].iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), bad);
        let o = run(&["--config", cfg.to_str().unwrap(), "evolve"]);
        assert_eq!(o.status.code(), Some(2), "{bad}: {}", stderr(&o));
        assert_eq!(stderr(&o).lines().count(), 1);
    }
    let o = run(&["--config", dir.path().join("absent.json").to_str().unwrap(), "evolve"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["no-such-verb"]);
    assert_eq!(o.status.code(), Some(2));
    assert_diagnostic(&o, "usage");
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn plot_missing_and_unknown_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "plot", dir.path().join("missing.jsonl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_diagnostic(&o, "missing_file");
    let odd = dir.path().join("data.txt");
    fs::write(&odd, "1 2 3").unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "plot", odd.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_diagnostic(&o, "malformed_input");
}

#[test]
fn plot_renders_energy_trace() {
    let dir = tempfile::tempdir().unwrap();
    let json = format!(r#"{{"driver": {COS_DENSITY}, "t_end": 0.3, "times": [0.1, 0.2, 0.3]}}"#);
    let cfg = write_config(dir.path(), "run.json", &json);
    let out = dir.path().join("out");
    assert!(run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "verify-theorem1"]).status.success());
    let o = run(&["--out", out.to_str().unwrap(), "plot", out.join("energy.csv").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(out.join("energy_energy.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn virasoro_check_prints_p2_at_charge_twelve() {
    let o = run(&["--kmax", "8", "--charge", "12", "virasoro-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("P_2 = 6(c_3 - c_2^2)"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn virasoro_check_is_seed_independent() {
    let a = run(&["--seed", "1", "virasoro-check"]);
    let b = run(&["--seed", "99", "virasoro-check"]);
    assert!(a.status.success() && b.status.success());
    let deterministic = |o: &Output| -> Vec<String> {
        stdout(o).lines().filter(|l| l.starts_with("P_") || l.contains("kirillov") || l.contains("anchors")).map(String::from).collect()
    };
    assert!(!deterministic(&a).is_empty());
    assert_eq!(deterministic(&a), deterministic(&b));
    assert_eq!(stdout(&run(&["--seed", "7", "virasoro-check"])), stdout(&run(&["--seed", "7", "virasoro-check"])));
}

#[test]
fn neretin_table_is_json() {
    let o = run(&["--charge", "12", "neretin", "--table", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let entries = table.as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[0]["k"], 2);
    let terms = entries[0]["polynomial"].as_array().unwrap();
    assert!(terms.iter().any(|t| t["monomial"]["3"] == 1 && t["coeff"][0] == 6.0));
}

#[test]
fn action_and_variation_reports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let json = format!(r#"{{"driver": {COS_DENSITY}, "t_end": 0.2}}"#);
    let cfg = write_config(dir.path(), "run.json", &json);
    let out = dir.path().join("out");
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "action"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let action: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("action.json")).unwrap()).unwrap();
    assert!(action.is_array() || action.is_object());
    let o = run(&["--out", out.to_str().unwrap(), "variation"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("variation.json").exists());
}
