use std::path::Path;
use std::process::{Command, Output};

use iadm_sim::config::BUNDLED;

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iadm-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled(name: &str) -> &'static str {
    BUNDLED.iter().find(|(n, _)| *n == name).unwrap().1
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn bundled_run_succeeds_and_reports_jerk() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&[
        "run",
        "--config",
        "table1_iadm",
        "--out",
        dir.path().to_str().unwrap(),
        "--no-svg",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("max jerk per vehicle"));
    assert!(dir.path().join("trajectory.csv").exists());
    assert!(!dir.path().join("speed.svg").exists());
}

#[test]
fn duration_mismatch_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled("table1_iadm").replace("duration = 200.0", "duration = 150.0");
    let config = write_config(dir.path(), "bad.toml", &text);
    let out = sim(&["run", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.toml"));
    assert!(stderr(&out).contains("schedule total"));
}

#[test]
fn drop_probability_out_of_range_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled("table1_iadm").replace("drop_probability = 0.0", "drop_probability = 1.5");
    let config = write_config(dir.path(), "bad.toml", &text);
    let out = sim(&["run", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("drop"));
}

#[test]
fn syntax_error_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled("table1_iadm").replace("s0 = 2.0", "s0 = ");
    let config = write_config(dir.path(), "broken.toml", &text);
    let out = sim(&["run", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 8"), "{}", stderr(&out));
}

#[test]
fn collision_exits_with_collision_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled("table1_iadm")
        .replace(
            "initial_positions = [80.0, 60.0, 40.0, 20.0, 0.0]",
            "initial_positions = [80.0, 60.0, 40.0, 33.0, 0.0]",
        )
        .replace(
            "initial_speeds = [15.0, 15.0, 15.0, 15.0, 15.0]",
            "initial_speeds = [15.0, 15.0, 0.0, 25.0, 15.0]",
        );
    let config = write_config(dir.path(), "crash.toml", &text);
    let out = sim(&["run", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("vehicle 3"), "{}", stderr(&out));
}

#[test]
fn missing_config_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&[
        "run",
        "--config",
        "/nonexistent/x.toml",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn compare_needs_two_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&[
        "compare",
        "--config",
        "table1_iadm",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("exactly two"));
    let out = sim(&["compare", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_rejects_different_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&[
        "compare",
        "--config",
        "table1_iadm",
        "--config",
        "stability_iadm",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("perturbation"));
}

#[test]
fn perturbation_beyond_duration_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = bundled("stability_iadm").replace("start = 100.0", "start = 250.0");
    let config = write_config(dir.path(), "late.toml", &text);
    let out = sim(&["stability", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("beyond"));
}

#[test]
fn stability_without_perturbation_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&[
        "stability",
        "--config",
        "table1_iadm",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_window_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sim(&[
        "run",
        "--config",
        "table1_iadm",
        "--window",
        "50,10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = sim(&[
        "run",
        "--config",
        "table1_iadm",
        "--window",
        "300,400",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
