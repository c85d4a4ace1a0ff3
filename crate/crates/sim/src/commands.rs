//! `run`, `compare` and `stability`: load, simulate, write artifacts.
//!
//! Simulations finish before anything is written, and every file lands in
//! the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use iadm_core::analysis::{
    jerk_profile, metrics_report, perturbation_response, stability_report, GapReference, MetricsReport,
    StabilityReport, Window, PLATOON_LEADER,
};
use iadm_core::{run_scenario, ScenarioConfig, TrajectoryLog};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{self, LoadedScenario};
use crate::error::SimError;
use crate::output;
use crate::svg::{self, Axes, Series};

/// Flags shared by all commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Replaces the link seed of every loaded scenario.
    pub seed: Option<u64>,
    pub svg: bool,
    pub window: Window,
    pub gap_reference: GapReference,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: None,
            svg: true,
            window: Window::default(),
            gap_reference: GapReference::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigRecord {
    pub path: PathBuf,
    /// SHA-256 of the effective scenario in canonical TOML form.
    pub sha256: String,
}

/// What a command read and wrote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub configs: Vec<ConfigRecord>,
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Manifest plus a short human-readable summary for the terminal.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub summary: String,
}

struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn create(dir: &Path) -> Result<Self, SimError> {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), SimError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| SimError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn finish(self, command: &'static str, configs: Vec<ConfigRecord>) -> Result<RunManifest, SimError> {
        let manifest = RunManifest {
            command,
            configs,
            out_dir: self.dir,
            artifacts: self.written,
        };
        let path = manifest.out_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes to JSON");
        fs::write(&path, json + "\n").map_err(|e| SimError::io(&path, e))?;
        Ok(manifest)
    }
}

fn load(path: &Path, options: &Options) -> Result<LoadedScenario, SimError> {
    let mut scenario = config::load(path)?;
    if let Some(seed) = options.seed {
        scenario.config.link.seed = seed;
    }
    Ok(scenario)
}

fn record(scenario: &LoadedScenario) -> Result<ConfigRecord, SimError> {
    let digest = Sha256::digest(config::to_toml(&scenario.config)?.as_bytes());
    let mut sha256 = String::with_capacity(64);
    for byte in digest {
        let _ = write!(sha256, "{byte:02x}");
    }
    Ok(ConfigRecord {
        path: scenario.origin.clone(),
        sha256,
    })
}

/// Runs two scenarios on separate threads.
fn run_pair(a: &ScenarioConfig, b: &ScenarioConfig) -> Result<(TrajectoryLog, TrajectoryLog), SimError> {
    let (ra, rb) = thread::scope(|s| {
        let ha = s.spawn(|| run_scenario(a));
        let rb = run_scenario(b);
        (ha.join().expect("simulation thread panicked"), rb)
    });
    Ok((ra?, rb?))
}

fn column(
    log: &TrajectoryLog,
    vehicle: usize,
    field: impl Fn(&iadm_core::platoon::Sample) -> Option<f64>,
) -> Vec<(f64, f64)> {
    log.frames
        .iter()
        .filter_map(|f| field(&f.vehicles[vehicle]).map(|y| (f.time, y)))
        .collect()
}

fn vehicle_name(id: usize) -> String {
    match id {
        0 => "scripted".to_owned(),
        PLATOON_LEADER => "leader".to_owned(),
        _ => format!("follower {}", id - PLATOON_LEADER),
    }
}

fn jerk_points(log: &TrajectoryLog, vehicle: usize) -> Vec<(f64, f64)> {
    let accel: Vec<f64> = log.frames.iter().map(|f| f.vehicles[vehicle].accel).collect();
    jerk_profile(&accel, log.dt)
        .map(|jerk| log.times().skip(1).zip(jerk).collect())
        .unwrap_or_default()
}

/// Speed, gap, acceleration and jerk charts for one or more runs; runs after
/// the first are dashed.
fn profile_charts(runs: &[(&str, &TrajectoryLog)], suffix: &str) -> Vec<(String, String)> {
    type Extract = fn(&TrajectoryLog, usize) -> Vec<(f64, f64)>;
    let charts: [(&str, &str, &str, usize, Extract); 4] = [
        ("speed", "speed", "speed (m/s)", 0, |l, i| {
            column(l, i, |s| Some(s.speed))
        }),
        ("gap", "gap", "gap (m)", PLATOON_LEADER, |l, i| column(l, i, |s| s.gap)),
        (
            "accel",
            "acceleration",
            "acceleration (m/s^2)",
            PLATOON_LEADER,
            |l, i| column(l, i, |s| Some(s.accel)),
        ),
        ("jerk", "jerk", "jerk (m/s^3)", PLATOON_LEADER, jerk_points),
    ];
    charts
        .iter()
        .map(|&(file, title, y_label, first, extract)| {
            let mut series = Vec::new();
            for (k, (label, log)) in runs.iter().enumerate() {
                for id in first..log.n_vehicles() {
                    let name = if runs.len() > 1 {
                        format!("{label} {}", vehicle_name(id))
                    } else {
                        vehicle_name(id)
                    };
                    let s = Series::new(name, extract(log, id), id);
                    series.push(if k > 0 { s.dashed() } else { s });
                }
            }
            let title = match runs {
                [(label, _)] => format!("{label} {title}"),
                _ => format!("{title} comparison"),
            };
            let axes = Axes {
                title: &title,
                x_label: "time (s)",
                y_label,
            };
            (format!("{file}{suffix}.svg"), svg::line_chart(axes, &series))
        })
        .collect()
}

fn metrics_summary(report: &MetricsReport, log: &TrajectoryLog) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}: {} steps", report.model, log.frames.len().saturating_sub(1));
    if let Some(gap) = log.min_gap() {
        let _ = writeln!(out, "  min gap {gap:.3} m");
    }
    let _ = writeln!(
        out,
        "  speed error l1 {:.3} l2 {:.3}, gap error l1 {:.3} l2 {:.3}",
        report.l1_speed, report.l2_speed, report.l1_gap, report.l2_gap
    );
    let jerks: Vec<String> = report.max_jerk.iter().map(|j| format!("{j:.4}")).collect();
    let _ = writeln!(out, "  max jerk per vehicle (m/s^3): {}", jerks.join(" "));
    out
}

/// Simulates one scenario and writes its trajectory, metrics and charts.
pub fn cmd_run(config_path: &Path, out_dir: &Path, options: &Options) -> Result<Outcome, SimError> {
    let scenario = load(config_path, options)?;
    let records = vec![record(&scenario)?];
    let log = run_scenario(&scenario.config)?;
    let report = metrics_report(&log, options.window, options.gap_reference)?;

    let mut writer = ArtifactWriter::create(out_dir)?;
    writer.write("trajectory.csv", &output::trajectory_csv(&log))?;
    writer.write("metrics.csv", &output::metrics_csv(std::slice::from_ref(&report)))?;
    writer.write("jerk_by_vehicle.csv", &output::jerk_csv(std::slice::from_ref(&report)))?;
    if options.svg {
        for (name, chart) in profile_charts(&[(report.model, &log)], "") {
            writer.write(&name, &chart)?;
        }
    }
    let summary = metrics_summary(&report, &log);
    let manifest = writer.finish("run", records)?;
    Ok(Outcome { manifest, summary })
}

fn check_comparable(a: &ScenarioConfig, b: &ScenarioConfig) -> Result<(), SimError> {
    let mismatch = [
        ("schedule", a.schedule != b.schedule),
        ("dt", a.dt() != b.dt()),
        ("duration", a.duration != b.duration),
        ("n_followers", a.n_followers != b.n_followers),
        ("initial_positions", a.initial_positions != b.initial_positions),
        ("initial_speeds", a.initial_speeds != b.initial_speeds),
        ("vehicle_length", a.vehicle_length != b.vehicle_length),
        ("perturbation", a.perturbation != b.perturbation),
    ];
    let differing: Vec<&str> = mismatch.iter().filter(|(_, d)| *d).map(|(n, _)| *n).collect();
    if differing.is_empty() {
        Ok(())
    } else {
        Err(SimError::Validation(format!(
            "scenarios are not comparable: they differ in {}",
            differing.join(", ")
        )))
    }
}

/// Runs two scenarios that differ only in model parameters and writes
/// side-by-side metrics and overlaid charts.
pub fn cmd_compare(config_paths: &[PathBuf], out_dir: &Path, options: &Options) -> Result<Outcome, SimError> {
    let [first, second] = config_paths else {
        return Err(SimError::Usage(format!(
            "compare needs exactly two --config arguments, got {}",
            config_paths.len()
        )));
    };
    let a = load(first, options)?;
    let b = load(second, options)?;
    check_comparable(&a.config, &b.config)?;
    let records = vec![record(&a)?, record(&b)?];
    let (log_a, log_b) = run_pair(&a.config, &b.config)?;
    let reports = [
        metrics_report(&log_a, options.window, options.gap_reference)?,
        metrics_report(&log_b, options.window, options.gap_reference)?,
    ];

    let (mut label_a, mut label_b) = (a.label(), b.label());
    if label_a == label_b {
        label_a.push_str("_1");
        label_b.push_str("_2");
    }
    let mut writer = ArtifactWriter::create(out_dir)?;
    writer.write(&format!("trajectory_{label_a}.csv"), &output::trajectory_csv(&log_a))?;
    writer.write(&format!("trajectory_{label_b}.csv"), &output::trajectory_csv(&log_b))?;
    writer.write("metrics.csv", &output::metrics_csv(&reports))?;
    writer.write("jerk_by_vehicle.csv", &output::jerk_csv(&reports))?;
    let table = output::comparison_table(&reports);
    writer.write("comparison.txt", &table)?;
    if options.svg {
        let runs = [(label_a.as_str(), &log_a), (label_b.as_str(), &log_b)];
        for (name, chart) in profile_charts(&runs, "_compare") {
            writer.write(&name, &chart)?;
        }
    }
    let manifest = writer.finish("compare", records)?;
    Ok(Outcome {
        manifest,
        summary: table,
    })
}

fn stability_charts(perturbed: &TrajectoryLog, baseline: &TrajectoryLog) -> Result<Vec<(String, String)>, SimError> {
    let response = perturbation_response(perturbed, baseline)?;
    let series: Vec<Series> = response
        .into_iter()
        .enumerate()
        .map(|(k, points)| Series::new(vehicle_name(k + PLATOON_LEADER), points, k + PLATOON_LEADER))
        .collect();
    let response_chart = svg::line_chart(
        Axes {
            title: "perturbation response",
            x_label: "time (s)",
            y_label: "speed error change (m/s)",
        },
        &series,
    );
    let series: Vec<Series> = (PLATOON_LEADER..perturbed.n_vehicles())
        .map(|i| {
            let points = perturbed
                .frames
                .iter()
                .map(|f| (f.time, f.vehicles[i - 1].speed - f.vehicles[i].speed))
                .collect();
            Series::new(vehicle_name(i), points, i)
        })
        .collect();
    let error_chart = svg::line_chart(
        Axes {
            title: "speed error to predecessor",
            x_label: "time (s)",
            y_label: "speed error (m/s)",
        },
        &series,
    );
    Ok(vec![
        ("response.svg".to_owned(), response_chart),
        ("speed_error.svg".to_owned(), error_chart),
    ])
}

/// Runs a perturbed scenario against its unperturbed baseline and reports
/// local and string stability.
pub fn cmd_stability(config_path: &Path, out_dir: &Path, options: &Options) -> Result<Outcome, SimError> {
    let scenario = load(config_path, options)?;
    if scenario.config.perturbation.is_none() {
        return Err(SimError::Validation(format!(
            "{}: stability analysis needs a [perturbation] section",
            config_path.display()
        )));
    }
    let records = vec![record(&scenario)?];
    let baseline_config = ScenarioConfig {
        perturbation: None,
        ..scenario.config.clone()
    };
    let (perturbed, baseline) = run_pair(&scenario.config, &baseline_config)?;
    let report: StabilityReport = stability_report(&perturbed, &baseline)?;
    let summary = output::stability_summary(perturbed.model.name(), &report);

    let mut writer = ArtifactWriter::create(out_dir)?;
    writer.write("trajectory.csv", &output::trajectory_csv(&perturbed))?;
    writer.write("stability.csv", &output::stability_csv(&report))?;
    writer.write("stability.txt", &summary)?;
    if options.svg {
        for (name, chart) in stability_charts(&perturbed, &baseline)? {
            writer.write(&name, &chart)?;
        }
    }
    let manifest = writer.finish("stability", records)?;
    Ok(Outcome { manifest, summary })
}
