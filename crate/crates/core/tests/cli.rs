use std::path::Path;
use std::process::{Command, Output};

use hallmhd::harness::{initial_state, RunConfig};

fn hallmhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hallmhd")).args(args).output().expect("spawn hallmhd")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn zero_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero");
    let cfg = write_config(dir.path(), "initial = zero\nn = 8\nt_end = 0.01\nsnapshots = 0.005\n");
    let o = hallmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["timeseries.csv", "summary.json", "config.txt", "final.hmhd", "snapshot_000.hmhd"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let rows = csv(&out.join("timeseries.csv"));
    assert_eq!(rows[0].len(), 29);
    assert_eq!(rows.len(), 12);
    assert!(column(&rows, "u_l2").iter().chain(&column(&rows, "b_l2")).all(|&v| v == 0.0));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["steps"], 10);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n = 16\nt_end = 0.01\namplitude = 0.05\n");
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = hallmhd(&["run", "--config", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        files.push((std::fs::read(out.join("timeseries.csv")).unwrap(), std::fs::read(out.join("final.hmhd")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let out = dir.path().join("c");
    assert_eq!(code(&hallmhd(&["run", "--config", &cfg, "--seed", "8", "--out", out.to_str().unwrap()])), 0);
    assert_ne!(std::fs::read(out.join("timeseries.csv")).unwrap(), files[0].0);
}

#[test]
fn beltrami_columns_decay_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("beltrami");
    let cfg = write_config(dir.path(), "initial = beltrami\namplitude = 0.1\nn = 16\nmu = 0.5\nnu = 0.5\nt_end = 0.2\n");
    let o = hallmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&out.join("timeseries.csv"));
    let (t, b, triple) = (column(&rows, "t"), column(&rows, "b_l2"), column(&rows, "triple_h12"));
    for i in 0..t.len() {
        assert!((b[i] / b[0] - (-0.5 * t[i]).exp()).abs() <= 1e-8, "t={}", t[i]);
        assert!((triple[i] / triple[0] - (-t[i]).exp()).abs() <= 1e-8, "t={}", t[i]);
    }
    assert!(column(&rows, "u_l2").iter().all(|&v| v <= 1e-14));
}

#[test]
fn inspect_prints_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let cfg = write_config(dir.path(), "dimension = 2.5\nn = 16\nt_end = 0.004\n");
    assert_eq!(code(&hallmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()])), 0);
    let o = hallmhd(&["inspect", out.join("final.hmhd").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let h: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(h["dim"], 2);
    assert_eq!(h["n"], 16);
    assert_eq!(h["components"], 6);
    assert!((h["time"].as_f64().unwrap() - 0.004).abs() < 1e-12);

    let bad = dir.path().join("bad.hmhd");
    std::fs::write(&bad, b"not a snapshot").unwrap();
    assert_eq!(code(&hallmhd(&["inspect", bad.to_str().unwrap()])), 2);
}

#[test]
fn failed_monitor_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n = 16\nt_end = 0.01\namplitude = 0.3\nenergy_tol = 1e-300\n");
    let o = hallmhd(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["passed"], false);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(code(&hallmhd(&["experiment", "--preset", "no-such-preset", "--out", out])), 2);
    assert_eq!(code(&hallmhd(&["experiment", "--out", out])), 2);
    assert_eq!(code(&hallmhd(&["run", "--dt", "-1", "--out", out])), 2);
    let cfg = write_config(dir.path(), "colour = blue\n");
    let o = hallmhd(&["run", "--config", &cfg, "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    // dt above the stability bound at t = 0
    let cfg = write_config(dir.path(), "n = 32\namplitude = 1\ndt = 0.1\n");
    assert_eq!(code(&hallmhd(&["run", "--config", &cfg, "--out", out])), 2);
}

#[test]
fn instability_mid_run_exits_three() {
    // u starts at rest, so the bound only tightens once the Lorentz force
    // has set it moving
    let text = "n = 16\neps = 0\nmu = 0.001\nnu = 0.001\namplitude = 1e-9\nb_amplitude = 2\nt_end = 1\n";
    let mut c = RunConfig::from_text(text).unwrap();
    let bound = initial_state(&c).unwrap().stable_dt(&c.params().unwrap(), c.hall_cfl);
    c.dt = bound * (1.0 - 1e-9);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(dir.path(), &format!("{text}dt = {:e}\n", c.dt));
    let o = hallmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("last_good.hmhd").exists());
    assert!(out.join("timeseries.csv").exists());
}

#[test]
fn check_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = hallmhd(&["check", "--n", "16", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("check.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["identities"].as_array().unwrap().len(), 8);
}

#[test]
fn experiment_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fk");
    let cfg = write_config(dir.path(), "monitors = energy, monotonicity, drift\n");
    let o = hallmhd(&[
        "experiment",
        "--preset",
        "fujita-kato-3d",
        "--config",
        &cfg,
        "--t-end",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["preset"], "fujita-kato-3d");
    assert!(r["fitted"]["critical_c"].as_f64().unwrap().is_finite());
}
