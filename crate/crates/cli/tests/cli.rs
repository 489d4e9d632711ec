//! End-to-end checks of the binary: exit codes, flag handling, file output.

use std::path::Path;
use std::process::{Command, Output};

fn tiltcov(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiltcov"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_MC_SPEC: &str = r#"
id = "smoke"
axis = "tilt"
grid = [0.0, 10.0, 20.0]
evaluators = ["montecarlo"]
modes = ["3dbf_height_aware", "2dbf"]

[network]
lambda_bs = 5e-5

[campaign]
trials = 400
seed = 3
"#;

#[test]
fn validate_accepts_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "good.toml", SMALL_MC_SPEC);
    let out = tiltcov(&["validate", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
}

#[test]
fn validate_rejects_unknown_field_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL_MC_SPEC.replace("seed = 3", "seed = 3\nbogus_field = 1");
    let cfg = write_config(dir.path(), "bad.toml", &bad);
    let out = tiltcov(&["validate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_field"));
}

#[test]
fn validate_rejects_empty_grid_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL_MC_SPEC.replace("grid = [0.0, 10.0, 20.0]", "grid = []");
    let cfg = write_config(dir.path(), "empty.toml", &bad);
    let out = tiltcov(&["validate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-empty"));
}

#[test]
fn missing_config_file_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltcov(&["validate", "--config", "nope.toml"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_writes_csv_with_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "smoke.toml", SMALL_MC_SPEC);
    let out = tiltcov(
        &["sweep", "--config", &cfg, "--out", "rows.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert!(body.starts_with("# tiltcov sweep results"));
    assert!(body.contains("# units:"));
    assert!(body.contains("scenario,case,evaluator,mode,axis,axis_value"));
    let rows: Vec<&str> = body.lines().filter(|l| l.starts_with("smoke,")).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].contains(",montecarlo,"));
}

#[test]
fn sweep_json_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "smoke.toml", SMALL_MC_SPEC);
    let out = tiltcov(
        &[
            "sweep", "--config", &cfg, "--out", "rows.json", "--format", "json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let body = std::fs::read_to_string(dir.path().join("rows.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 6);
    assert_eq!(doc["spec"]["id"], "smoke");
}

#[test]
fn coverage_requires_a_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltcov(&["coverage"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coverage_runs_both_evaluators() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltcov(
        &[
            "coverage",
            "--lambda",
            "5e-5",
            "--beta",
            "10",
            "--a",
            "0",
            "--evaluator",
            "both",
            "--trials",
            "4000",
            "--seed",
            "9",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("analytic:"), "{stdout}");
    assert!(stdout.contains("montecarlo:"), "{stdout}");
    assert!(stdout.contains("tau=4 dB"), "{stdout}");
}

#[test]
fn figures_quick_scenario_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltcov(
        &[
            "figures",
            "--scenario",
            "fig3_mc",
            "--quick",
            "--trials",
            "1500",
            "--out",
            "figs",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = std::fs::read_to_string(dir.path().join("figs/fig3_mc.csv")).unwrap();
    // 7 quick grid points x 4 height cases
    assert_eq!(body.lines().filter(|l| l.starts_with("fig3_mc,")).count(), 28);
}

#[test]
fn figures_unknown_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltcov(&["figures", "--scenario", "fig99"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
