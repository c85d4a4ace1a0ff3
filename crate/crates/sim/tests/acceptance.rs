//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use iadm_core::analysis::{
    equilibrium_check, equilibrium_gap, gap_error_sums, is_string_stable, jerk_profile, l1_sum, l2_sum, max_jerk,
    metrics_report, stability_report, GapReference, Window,
};
use iadm_core::iadm::{comfortable_accel, comfortable_decel, next_speed, safe_gap};
use iadm_core::idm::{idm_accel, idm_desired_gap, idm_next_speed};
use iadm_core::platoon::{bumper_gap, Frame, Sample};
use iadm_core::schedule::schedule_speed_at;
use iadm_core::{
    reference, run_scenario, Branch, CarFollowingModel, IadmInput, IadmParams, IdmParams, LeadSchedule, LeadSource,
    PerceivedLead, Platoon, Segment, TrajectoryLog,
};
use iadm_sim::config::BUNDLED;
use iadm_sim::output::trajectory_csv;
use iadm_sim::{cmd_run, parse, Options};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

/// Wall-clock budget for the criteria that carry one.
const RUNTIME_LIMIT: Duration = Duration::from_secs(1);
const FIXED_POINT_TOLERANCE: f64 = 1e-9;
const FIXED_POINT_STEPS: usize = 10_000;
const JERK_LIMIT: f64 = 1.0;
const JERK_MARGIN: f64 = 1e-6;
const ORACLE_REL_TOLERANCE: f64 = 1e-9;
const NORM_CASES: u32 = 1_000;
const MONOTONE_TOLERANCE: f64 = 1e-9;
const MONOTONE_MIN_POINTS: usize = 100;
const FD_STEP: f64 = 1e-3;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn runner_config(cases: u32) -> Config {
    Config {
        failure_persistence: None,
        ..Config::with_cases(cases)
    }
}

fn lead(gap: f64, speed: f64) -> PerceivedLead {
    PerceivedLead::new(gap, speed, LeadSource::Comm)
}

fn equilibrium_fixed_points() -> Verdict {
    let start = Instant::now();
    let p = IadmParams::default();
    // one follower behind a lead cruising at c, gap integrated exactly
    let drift = |c: f64| -> f64 {
        let (mut v, mut gap) = (c, p.s0 + c * p.dt);
        let mut worst: f64 = 0.0;
        for _ in 0..FIXED_POINT_STEPS {
            let out = next_speed(&p, IadmInput { v, lead: lead(gap, c) }).expect("valid state");
            gap += (c - out.v_next) * p.dt;
            v = out.v_next;
            worst = worst.max((v - c).abs());
        }
        worst
    };
    let mut worst: f64 = 0.0;
    for c in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0] {
        worst = worst.max(drift(c));
    }
    let listed = worst;
    let mut runner = TestRunner::new(runner_config(32));
    let random = runner.run(&(0.0..=p.v_freeflow), |c| {
        let d = drift(c);
        prop_assert!(d <= FIXED_POINT_TOLERANCE, "c = {c}: drift {d}");
        Ok(())
    });
    let elapsed = start.elapsed();
    check(
        listed <= FIXED_POINT_TOLERANCE && random.is_ok() && elapsed < RUNTIME_LIMIT,
        format!(
            "max |dv| {listed:.1e} over {FIXED_POINT_STEPS} steps at c = 0..25 (tol {FIXED_POINT_TOLERANCE:.0e}); 32 random c: {}; {elapsed:.2?}",
            random.map_or_else(|e| e.to_string(), |_| "ok".to_owned())
        ),
    )
}

fn collision_freedom() -> Verdict {
    let start = Instant::now();
    let log = run_scenario(&reference::table1(reference::table1_iadm_model()));
    let elapsed = start.elapsed();
    match log {
        Ok(log) => {
            let min_gap = log.min_gap().unwrap_or(f64::NAN);
            let all_positive = log
                .frames
                .iter()
                .all(|f| f.vehicles.iter().filter_map(|s| s.gap).all(|g| g > 0.0));
            check(
                all_positive && elapsed < RUNTIME_LIMIT,
                format!(
                    "{} steps, min bumper gap {min_gap:.3} m; {elapsed:.2?}",
                    log.frames.len() - 1
                ),
            )
        }
        Err(e) => Err(e.to_string()),
    }
}

fn comfort_bound() -> Verdict {
    let log = run_scenario(&reference::table1(reference::table1_iadm_model())).map_err(|e| e.to_string())?;
    let jerk = max_jerk(&log, Window::default()).map_err(|e| e.to_string())?;
    let below = jerk.iter().all(|&j| j < JERK_LIMIT - JERK_MARGIN);
    let leader_highest = jerk[1..].iter().all(|&j| jerk[0] >= j + JERK_MARGIN);
    let listed: Vec<String> = jerk.iter().map(|j| format!("{j:.4}")).collect();
    check(
        below && leader_highest,
        format!(
            "max |jerk| 20-200 s per vehicle [{}] m/s^3, limit {JERK_LIMIT} - {JERK_MARGIN:.0e}, leader highest: {leader_highest}",
            listed.join(", ")
        ),
    )
}

fn stability() -> Verdict {
    let start = Instant::now();
    let perturbed = reference::stability(reference::table1_iadm_model());
    let baseline = reference::table1(reference::table1_iadm_model());
    let report = run_scenario(&perturbed)
        .and_then(|p| run_scenario(&baseline).and_then(|b| stability_report(&p, &b)))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let followers_non_increasing = is_string_stable(&report.peaks[1..]);
    let peaks: Vec<String> = report.peaks.iter().map(|p| format!("{p:.4}")).collect();
    check(
        report.local_stable && report.string_stable && followers_non_increasing && elapsed < RUNTIME_LIMIT,
        format!(
            "local {} string {} peaks [{}] m/s; {elapsed:.2?}",
            report.local_stable,
            report.string_stable,
            peaks.join(", ")
        ),
    )
}

fn model_ordering() -> Verdict {
    let window = Window::default();
    let reference_gap = GapReference::default();
    let iadm = run_scenario(&reference::table1(reference::table1_iadm_model()))
        .and_then(|log| metrics_report(&log, window, reference_gap))
        .map_err(|e| e.to_string())?;
    let idm = run_scenario(&reference::table1(reference::table1_idm_model()))
        .and_then(|log| metrics_report(&log, window, reference_gap))
        .map_err(|e| e.to_string())?;
    let pairs = [
        ("l1 speed", iadm.l1_speed, idm.l1_speed),
        ("l2 speed", iadm.l2_speed, idm.l2_speed),
        ("l1 gap", iadm.l1_gap, idm.l1_gap),
        ("l2 gap", iadm.l2_gap, idm.l2_gap),
    ];
    let detail: Vec<String> = pairs.iter().map(|(n, a, b)| format!("{n} {a:.2} < {b:.2}")).collect();
    check(
        pairs.iter().all(|(_, a, b)| a < b),
        format!("IADM vs IDM: {}", detail.join(", ")),
    )
}

fn rel_close(actual: f64, expected: f64) -> bool {
    (actual - expected).abs() <= ORACLE_REL_TOLERANCE * expected.abs().max(f64::MIN_POSITIVE)
}

#[derive(Default)]
struct Oracles {
    count: usize,
    failures: Vec<String>,
}

impl Oracles {
    fn expect(&mut self, name: &str, actual: f64, expected: f64) {
        self.count += 1;
        if !rel_close(actual, expected) {
            self.failures.push(format!("{name}: {actual} != {expected}"));
        }
    }

    fn fail(&mut self, what: String) {
        self.failures.push(what);
    }
}

fn unit_oracles() -> Verdict {
    let iadm = IadmParams::default();
    let idm = IdmParams::default();
    let mut oracles = Oracles::default();

    oracles.expect("safe gap, equal speeds", safe_gap(&iadm, 15.0, 15.0), 2.0 + 15.0 * 0.1);
    oracles.expect(
        "safe gap, closing",
        safe_gap(&iadm, 20.0, 15.0),
        2.0 + 20.0 * 0.1 + 5.0 * 0.1,
    );
    oracles.expect(
        "comfortable accel",
        comfortable_accel(&iadm, 15.0, 19.0, 50.0, 3.5),
        1.5 * 4.0f64.tanh(),
    );
    oracles.expect(
        "comfortable decel",
        comfortable_decel(&iadm, 19.0, 15.0, 50.0, 4.3),
        -1.5 * 4.0f64.tanh(),
    );
    let soft = IadmParams { k: 0.5, ..iadm };
    oracles.expect(
        "comfortable decel, k = 0.5",
        comfortable_decel(&soft, 17.0, 15.0, 50.0, 4.3),
        -1.5 * 1.0f64.tanh(),
    );

    let braking = IadmParams { s0: 5.0, ..iadm };
    match next_speed(
        &braking,
        IadmInput {
            v: 5.0,
            lead: lead(1.0, 0.0),
        },
    ) {
        Ok(out) => {
            let s_net = 1.0 - (5.0 + 5.0 * 0.1 + 5.0 * 0.1);
            let radicand = 0.0 - 2.0 * (-1.5 * 5.0f64.tanh()) * s_net;
            oracles.expect("max-brake s_net", out.s_net, -5.0);
            if !(radicand < 0.0 && out.branch == Branch::MaxBrake) {
                oracles.fail(format!("max-brake: radicand {radicand}, branch {:?}", out.branch));
            }
            oracles.expect("max-brake speed", out.v_next, 5.0 - 1.5 * 0.1);
        }
        Err(e) => oracles.fail(format!("max-brake: {e}")),
    }

    oracles.expect(
        "idm desired gap, equal speeds",
        idm_desired_gap(&idm, 15.0, 15.0),
        2.0 + 15.0 * 0.1,
    );
    oracles.expect(
        "idm desired gap, closing",
        idm_desired_gap(&idm, 20.0, 15.0),
        2.0 + 20.0 * 0.1 + 20.0 * 5.0 / (2.0 * (1.5f64 * 1.5).sqrt()),
    );
    let at_desired = 2.0 + 15.0 * 0.1;
    let accel = 1.5 * (1.0 - (15.0f64 / 25.0).powi(4) - 1.0);
    oracles.expect(
        "idm accel at desired gap",
        idm_accel(&idm, 15.0, 15.0, at_desired).unwrap_or(f64::NAN),
        accel,
    );
    oracles.expect(
        "idm euler step",
        idm_next_speed(&idm, 15.0, &lead(at_desired, 15.0)).map_or(f64::NAN, |r| r.0),
        15.0 + accel * 0.1,
    );

    let ramp = LeadSchedule::new(15.0, vec![Segment::hold(15.0, 30.0), Segment::ramp(0.5, 25.0, 20.0)]).unwrap();
    oracles.expect(
        "schedule 10 s into ramp",
        schedule_speed_at(&ramp, 40.0).unwrap_or(f64::NAN),
        15.0 + 0.5 * 10.0,
    );

    let platoon = Platoon::new(reference::table1(reference::table1_iadm_model())).unwrap();
    for pair in platoon.states().windows(2) {
        oracles.expect("initial bumper gap", bumper_gap(&pair[0], &pair[1]), 20.0 - 5.0);
    }

    let jerk = jerk_profile(&[0.0, 0.5, 0.5], 0.1).unwrap();
    oracles.expect("jerk rise", jerk[0], 0.5 / 0.1);
    if jerk[1] != 0.0 {
        oracles.fail(format!("jerk flat: {}", jerk[1]));
    }
    oracles.expect("jerk fall", jerk_profile(&[1.0, -1.0], 0.1).unwrap()[0], -2.0 / 0.1);
    oracles.expect("l1 one vehicle", l1_sum(&[[1.0, -1.0, 2.0]]), 1.0 + 1.0 + 2.0);
    oracles.expect("l2 one vehicle", l2_sum(&[[1.0, -1.0, 2.0]]), 6.0f64.sqrt());
    oracles.expect("l2 two vehicles", l2_sum(&[[3.0], [4.0]]), 3.0 + 4.0);

    let (l1_gap, l2_gap) = gap_error_sums(
        &deviation_log(&[2.0, -2.0]),
        Window::default(),
        GapReference::PlatoonLeader,
    )
    .unwrap_or((f64::NAN, f64::NAN));
    oracles.expect("gap deviation l1", l1_gap, 4.0);
    oracles.expect("gap deviation l2", l2_gap, 8.0f64.sqrt());

    let model = CarFollowingModel::Iadm(iadm);
    oracles.expect(
        "iadm equilibrium gap",
        equilibrium_gap(&model, 15.0).unwrap_or(f64::NAN),
        3.5,
    );
    if equilibrium_check(&model, 15.0) != Ok(true) {
        oracles.fail("iadm equilibrium at 15 m/s".to_owned());
    }

    let mut runner = TestRunner::new(runner_config(NORM_CASES));
    let matrices = prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 1..40), 1..8);
    let norms = runner.run(&matrices, |m| {
        let (l1, l2) = (l1_sum(&m), l2_sum(&m));
        prop_assert!(l1 >= l2 * (1.0 - 1e-12), "l1 {l1} < l2 {l2}");
        Ok(())
    });
    if let Err(e) = norms {
        oracles.fail(format!("l1 >= l2: {e}"));
    }

    check(
        oracles.failures.is_empty(),
        if oracles.failures.is_empty() {
            format!(
                "{} hand-computed values within {ORACLE_REL_TOLERANCE:.0e} relative; l1 >= l2 on {NORM_CASES} random matrices",
                oracles.count
            )
        } else {
            oracles.failures.join("; ")
        },
    )
}

/// A log whose single follower's gap differs from the leader's by the given
/// deviations.
fn deviation_log(deviations: &[f64]) -> TrajectoryLog {
    let sample = |position: f64, gap: Option<f64>| Sample {
        position,
        speed: 10.0,
        accel: 0.0,
        gap,
        branch: None,
    };
    let frames = deviations
        .iter()
        .enumerate()
        .map(|(j, d)| Frame {
            time: 20.0 + j as f64 * 0.1,
            vehicles: vec![
                sample(100.0, None),
                sample(80.0, Some(15.0)),
                sample(60.0, Some(15.0 - d)),
            ],
        })
        .collect();
    TrajectoryLog {
        model: reference::table1_iadm_model(),
        dt: 0.1,
        perturbation: None,
        frames,
        link_stats: Vec::new(),
    }
}

#[derive(Default)]
struct SignCheck {
    checked: usize,
    violations: usize,
    worst: f64,
}

impl SignCheck {
    /// `slope_sign` is +1 for a non-decreasing requirement, -1 for
    /// non-increasing.
    fn record(&mut self, delta: f64, slope_sign: f64) {
        self.checked += 1;
        let wrong = -slope_sign * delta;
        if wrong > MONOTONE_TOLERANCE {
            self.violations += 1;
            self.worst = self.worst.max(wrong);
        }
    }

    fn summary(&self, name: &str) -> String {
        format!(
            "{name} {}/{} violations (worst {:.3e} m/s^2)",
            self.violations, self.checked, self.worst
        )
    }
}

fn monotonicity() -> Verdict {
    let p = IadmParams::default();
    let realized = |v: f64, lead_speed: f64, gap: f64| {
        next_speed(
            &p,
            IadmInput {
                v,
                lead: lead(gap, lead_speed),
            },
        )
        .expect("grid point is a valid state")
    };
    let interior = |b: Branch| !matches!(b, Branch::FreeFlow | Branch::MaxBrake);
    let (mut in_speed, mut in_lead, mut in_gap) = (SignCheck::default(), SignCheck::default(), SignCheck::default());
    // offset lead grid keeps every point and its neighbours off the equal-speed switch
    let speeds: Vec<f64> = (0..12).map(|i| 0.5 + 2.0 * i as f64).collect();
    let leads: Vec<f64> = (0..12).map(|i| 1.25 + 2.0 * i as f64).collect();
    let gaps: Vec<f64> = (0..16).map(|i| p.s0 + 1.0 + 5.0 * i as f64).collect();
    for &v in &speeds {
        for &vl in &leads {
            for &gap in &gaps {
                let base = realized(v, vl, gap);
                if !interior(base.branch) {
                    continue;
                }
                let dv = realized(v + FD_STEP, vl, gap);
                if interior(dv.branch) {
                    in_speed.record(dv.accel - base.accel, -1.0);
                }
                let dl = realized(v, vl + FD_STEP, gap);
                if interior(dl.branch) {
                    in_lead.record(dl.accel - base.accel, 1.0);
                }
                let dg = realized(v, vl, gap + FD_STEP);
                if interior(dg.branch) {
                    in_gap.record(dg.accel - base.accel, 1.0);
                }
            }
        }
    }
    let enough = [&in_speed, &in_lead, &in_gap]
        .iter()
        .all(|c| c.checked >= MONOTONE_MIN_POINTS);
    let clean = in_speed.violations + in_lead.violations + in_gap.violations == 0;
    check(
        enough && clean,
        format!(
            "{}; {}; {} (tol {MONOTONE_TOLERANCE:.0e}, step {FD_STEP:.0e})",
            in_speed.summary("d/dv <= 0"),
            in_lead.summary("d/dlead >= 0"),
            in_gap.summary("d/dgap >= 0")
        ),
    )
}

fn determinism() -> Verdict {
    let mut bytes = 0;
    for (name, text) in BUNDLED {
        let config = parse(text).map_err(|e| format!("{name}: {e}"))?;
        let a = run_scenario(&config)
            .map(|l| trajectory_csv(&l))
            .map_err(|e| e.to_string())?;
        let b = run_scenario(&config)
            .map(|l| trajectory_csv(&l))
            .map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{name}: in-memory CSVs differ"));
        }
        bytes += a.len();
    }
    let (first, second) = (
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    );
    let options = Options {
        svg: false,
        ..Options::default()
    };
    for dir in [&first, &second] {
        cmd_run("table1_iadm".as_ref(), dir.path(), &options).map_err(|e| e.to_string())?;
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("trajectory.csv")).unwrap_or_default();
    let on_disk = read(&first) == read(&second) && !read(&first).is_empty();
    check(
        on_disk,
        format!(
            "{} bundled configs, {bytes} CSV bytes identical across runs; files on disk identical: {on_disk}",
            BUNDLED.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("equilibrium fixed points", equilibrium_fixed_points),
        ("collision freedom", collision_freedom),
        ("comfort bound", comfort_bound),
        ("local and string stability", stability),
        ("IADM beats IDM on error sums", model_ordering),
        ("unit oracles", unit_oracles),
        ("monotonicity", monotonicity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
