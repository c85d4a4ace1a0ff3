//! CSV and plain-text renderings of logs and reports.

use std::fmt::Write;

use iadm_core::analysis::{MetricsReport, StabilityReport};
use iadm_core::TrajectoryLog;

pub const TRAJECTORY_HEADER: &str = "t,vehicle,position_m,speed_mps,accel_mps2,gap_m,branch";
pub const METRICS_HEADER: &str = "model,l1_speed,l2_speed,l1_gap,l2_gap,max_jerk_mps3,window_start_s,window_end_s";

/// One row per vehicle per frame. Floats use the shortest representation
/// that reads back to the same value.
pub fn trajectory_csv(log: &TrajectoryLog) -> String {
    let mut out = String::with_capacity(64 * log.frames.len() * log.n_vehicles().max(1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for frame in &log.frames {
        for (id, s) in frame.vehicles.iter().enumerate() {
            let _ = write!(out, "{},{id},{},{},{},", frame.time, s.position, s.speed, s.accel);
            if let Some(gap) = s.gap {
                let _ = write!(out, "{gap}");
            }
            out.push(',');
            if let Some(branch) = s.branch {
                out.push_str(branch.as_str());
            }
            out.push('\n');
        }
    }
    out
}

pub fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.model,
            r.l1_speed,
            r.l2_speed,
            r.l1_gap,
            r.l2_gap,
            r.overall_max_jerk(),
            r.window.start,
            r.window.end
        );
    }
    out
}

/// Per-vehicle maximum jerk, platoon leader first.
pub fn jerk_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("model,vehicle,max_jerk_mps3\n");
    for r in reports {
        for (i, j) in r.max_jerk.iter().enumerate() {
            let _ = writeln!(out, "{},{},{j}", r.model, i + 1);
        }
    }
    out
}

/// Side-by-side speed error, gap error and jerk tables.
pub fn comparison_table(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    let Some(first) = reports.first() else {
        return out;
    };
    let _ = writeln!(out, "window {} s to {} s\n", first.window.start, first.window.end);
    let mut table = |title: &str, cols: [&str; 2], value: &dyn Fn(&MetricsReport) -> [f64; 2]| {
        let _ = writeln!(out, "{title}");
        let _ = writeln!(out, "{:<8} {:>14} {:>14}", "model", cols[0], cols[1]);
        for r in reports {
            let [a, b] = value(r);
            let _ = writeln!(out, "{:<8} {a:>14.3} {b:>14.3}", r.model);
        }
        out.push('\n');
    };
    table("speed error (m/s)", ["l1", "l2"], &|r| [r.l1_speed, r.l2_speed]);
    table("gap error (m)", ["l1", "l2"], &|r| [r.l1_gap, r.l2_gap]);
    table("jerk (m/s^3)", ["max", "leader max"], &|r| {
        [r.overall_max_jerk(), r.max_jerk.first().copied().unwrap_or(0.0)]
    });
    out
}

pub fn stability_csv(report: &StabilityReport) -> String {
    let mut out = String::from("vehicle,peak_response_mps,final_residual_mps\n");
    for (i, (peak, residual)) in report.peaks.iter().zip(&report.residuals).enumerate() {
        let _ = writeln!(out, "{},{peak},{residual}", i + 1);
    }
    out
}

pub fn stability_summary(model: &str, report: &StabilityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {model}");
    let _ = writeln!(out, "local_stable {}", report.local_stable);
    let _ = writeln!(out, "string_stable {}", report.string_stable);
    for (i, peak) in report.peaks.iter().enumerate() {
        let _ = writeln!(out, "vehicle {} peak {peak:.6} m/s", i + 1);
    }
    out
}
