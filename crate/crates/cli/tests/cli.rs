use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimo-energy")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn theory_reports_four_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = run(&["theory", "--out-dir", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("theory.json")).unwrap()).unwrap();
    let names: Vec<&str> = json["schemes"].as_array().unwrap().iter().map(|s| s["scheme"].as_str().unwrap()).collect();
    assert_eq!(names, ["olp", "mrt", "zf", "rzf-statistical"]);
    for key in ["epsilon_j", "epsilon_wh", "sigma_var", "theta", "terms_used"] {
        assert!(json[key].is_number(), "{key}");
    }
    let csv = fs::read_to_string(dir.path().join("theory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_digest"], json["config_digest"]);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn infeasible_mrt_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nrate = 1.6\n");
    let o = run(&["theory", "--config", &cfg, "--out-dir", &dir.path().display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mrt is infeasible"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let cfg = write_config(dir.path(), "[system]\nusers = 64\nantennas = 32\n");
    let o = run(&["theory", "--config", &cfg, "--out-dir", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`users`"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "[cell]\nnoise_db = -97.8\n");
    let o = run(&["theory", "--config", &cfg, "--out-dir", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("noise_db"), "{}", stderr(&o));

    let o = run(&["simulate", "--mode", "slow", "--out-dir", &out]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--tau", "1.2", "--out-dir", &out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["simulate", "--trials", "50", "--seed", "9", "--out-dir", &d.path().display().to_string()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["results.csv", "ccdf.csv", "summary.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let results = fs::read_to_string(a.path().join("results.csv")).unwrap();
    assert!(results.starts_with("trial,energy_j\n"));
    assert_eq!(results.lines().count(), 51);
    let ccdf = fs::read_to_string(a.path().join("ccdf.csv")).unwrap();
    assert!(ccdf.starts_with("alpha_w,empirical,theoretical\n"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "fast");
    for key in ["config_digest", "epsilon", "sigma", "ratio_mean", "ratio_var", "ks_stat"] {
        assert!(!summary[key].is_null(), "{key}");
    }
}

#[test]
fn exact_mode_runs_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nusers = 4\nantennas = 16\n[simulation]\nhorizon_h = 0.1\n");
    let o = run(&[
        "simulate", "--config", &cfg, "--mode", "exact", "--scheme", "zf", "--tau", "0.2", "--trials", "5", "--out-dir",
        &dir.path().display().to_string(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"exact\"") && summary.contains("\"zf\""));
}

#[test]
fn plan_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nantennas = 128\n[simulation]\nhorizon_h = 12.0\n[plan]\nchi = 0.01\n");
    let o = run(&["plan", "--config", &cfg, "--out-dir", &dir.path().display().to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let battery = fs::read_to_string(dir.path().join("battery.csv")).unwrap();
    assert!(battery.starts_with("scheme,users,antennas,rate,epsilon_j,std_dev_j,battery_j,battery_wh\n"));
    let radius = fs::read_to_string(dir.path().join("radius.csv")).unwrap();
    assert_eq!(radius.lines().count(), 1 + 4 * 4);
}

#[test]
fn trajectories_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nusers = 3\nantennas = 8\n[simulation]\nhorizon_h = 0.05\n");
    let o = run(&["trajectories", "--config", &cfg, "--trials", "2", "--out-dir", &dir.path().display().to_string()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trajectories.csv")).unwrap();
    // 0.05 h = 6 slots, so 7 positions per user
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 7);
    assert!(csv.starts_with("trial,user,slot,x_m,y_m\n"));
}
