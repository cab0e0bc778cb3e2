//! End-to-end checks of the thinfilm binary: exit codes, file outputs, and
//! run-to-run determinism.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_thinfilm");

fn periodic_config(t_end: f64, initial: &str) -> String {
    format!(
        r#"{{
  "mode": "periodic",
  "profile": {{"kind": "stationary", "shape": [0.9, 0.2]}},
  "k": 0.1,
  "energies": {{"a": 0.0, "b": 1.0, "c": 0.0}},
  "l": 2.0,
  "lambda_bar": 0.5,
  "grid_n": 101,
  "t_end": {t_end},
  "initial": {initial},
  "stepper": {{"dt": 1e-4}},
  "seed": 7
}}"#
    )
}

fn run_bin(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn thinfilm")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn unknown_config_key_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let text = periodic_config(1e-3, r#"{"type": "steady"}"#)
        .replace("\"l\": 2.0,", "\"l\": 2.0,\n  \"gamma\": 1,");
    write(&cfg, &text);
    let out = run_bin(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma"), "error does not name the key: {err}");
}

#[test]
fn simulate_writes_diagnostics_snapshot_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(&cfg, &periodic_config(1e-3, r#"{"type": "steady"}"#));
    let out_dir = dir.path().join("out");
    let out = run_bin(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("simulate: t = "), "stdout: {stdout}");

    let csv = std::fs::read_to_string(out_dir.join("diag.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,mass,energy,dissipation,lambda,min_h,newton_iters,dt"
    );
    assert_eq!(lines.count(), 10, "expected one row per accepted step");

    let snap = std::fs::read_to_string(out_dir.join("final.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&snap).unwrap();
    assert_eq!(v["n"], 101);
    assert_eq!(v["h"].as_array().unwrap().len(), 101);

    let svg = std::fs::read_to_string(out_dir.join("profiles.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "not an svg: {}", &svg[..40.min(svg.len())]);
}

#[test]
fn simulate_is_deterministic_for_fixed_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        &periodic_config(1e-3, r#"{"type": "steady_plus_perturbation", "eps": 0.01}"#),
    );
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let out = run_bin(&[
            "simulate",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        outputs.push((
            std::fs::read(out_dir.join("diag.csv")).unwrap(),
            std::fs::read(out_dir.join("final.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "diag.csv differs between identical runs");
    assert_eq!(outputs[0].1, outputs[1].1, "final.json differs between identical runs");
}

#[test]
fn snapshot_restart_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let perturbed = r#"{"type": "steady_plus_perturbation", "eps": 0.01}"#;

    // uninterrupted reference to t = 1e-3
    let cfg_full = dir.path().join("full.json");
    write(&cfg_full, &periodic_config(1e-3, perturbed));
    let full_dir = dir.path().join("full");
    let out = run_bin(&[
        "simulate",
        cfg_full.to_str().unwrap(),
        "--out",
        full_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    // same run interrupted at 5e-4 and restarted from the snapshot
    let cfg_head = dir.path().join("head.json");
    write(&cfg_head, &periodic_config(5e-4, perturbed));
    let head_dir = dir.path().join("head");
    let out = run_bin(&[
        "simulate",
        cfg_head.to_str().unwrap(),
        "--out",
        head_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let snap_path = head_dir.join("final.json");
    let restart_initial = format!(
        r#"{{"type": "explicit_samples", "path": "{}"}}"#,
        snap_path.to_str().unwrap()
    );
    let cfg_tail = dir.path().join("tail.json");
    write(&cfg_tail, &periodic_config(1e-3, &restart_initial));
    let tail_dir = dir.path().join("tail");
    let out = run_bin(&[
        "simulate",
        cfg_tail.to_str().unwrap(),
        "--out",
        tail_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let parse = |p: &Path| -> (Vec<f64>, f64, f64) {
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        (
            v["h"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect(),
            v["lambda"].as_f64().unwrap(),
            v["t"].as_f64().unwrap(),
        )
    };
    let (h_full, l_full, t_full) = parse(&full_dir.join("final.json"));
    let (h_tail, l_tail, t_tail) = parse(&tail_dir.join("final.json"));
    assert!((t_full - t_tail).abs() <= 1e-15);
    assert!((l_full - l_tail).abs() <= 1e-12, "lambda gap {}", (l_full - l_tail).abs());
    let gap = h_full
        .iter()
        .zip(&h_tail)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(gap <= 1e-12, "restart drifted by {gap:e}");
}

#[test]
fn equilibrium_rejects_halfline_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        r#"{
  "mode": "halfline",
  "profile": {"kind": "constant_descent", "H0": 1.2, "t0": 2.0, "n": 1.0},
  "k": 0.3,
  "energies": {"a": 0.0, "b": 1.0, "c": 0.0},
  "x_max": 10.0,
  "far_height": 1.0,
  "lambda0": 0.5,
  "grid_n": 101,
  "t_end": 0.01,
  "initial": {"type": "steady"},
  "stepper": {"dt": 1e-4}
}"#,
    );
    let out = run_bin(&["equilibrium", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("periodic"));
}

#[test]
fn degenerate_snapshot_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // a film that has already touched down cannot be evolved
    let heights: Vec<String> = (0..101).map(|i| format!("{}", -1.0 + 0.01 * i as f64)).collect();
    let snap = format!(
        r#"{{"n": 101, "a": 0.5, "b": 2.0, "h": [{}], "lambda": 0.5, "t": 0.0}}"#,
        heights.join(", ")
    );
    let snap_path = dir.path().join("bad.json");
    write(&snap_path, &snap);
    let cfg = dir.path().join("run.json");
    write(
        &cfg,
        &periodic_config(
            1e-3,
            &format!(
                r#"{{"type": "explicit_samples", "path": "{}"}}"#,
                snap_path.to_str().unwrap()
            ),
        ),
    );
    let out = run_bin(&["simulate", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn nondim_reports_scales() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    write(
        &params,
        r#"{"h": 1e-4, "sigma": 0.07, "mu_l": 1e-3, "theta": 0.02, "beta_phys": 1e6, "t0": 1.0, "epsilon": 0.1}"#,
    );
    let out = run_bin(&["nondim", params.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("nondim: k = "), "stdout: {stdout}");
}
