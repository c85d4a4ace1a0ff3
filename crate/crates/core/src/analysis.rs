//! Metrics over simulation logs: jerk, l1/l2 speed and gap errors,
//! perturbation stability and equilibrium checks.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::iadm::{self, IadmInput};
use crate::idm;
use crate::model::CarFollowingModel;
use crate::perception::{LeadSource, PerceivedLead};
use crate::platoon::{Frame, TrajectoryLog};
use crate::TIME_EPS;

/// Id of the platoon leader in a log; speed and gap errors are taken
/// relative to it.
pub const PLATOON_LEADER: usize = 1;

/// Closed time interval over which metrics are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Default for Window {
    /// Skips the first 20 s, while the platoon forms.
    fn default() -> Self {
        Self {
            start: 20.0,
            end: 200.0,
        }
    }
}

impl Window {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start <= end) {
            return Err(Error::invalid("window", "start must not exceed end"));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start - TIME_EPS && t <= self.end + TIME_EPS
    }

    fn frames<'a>(&self, log: &'a TrajectoryLog) -> Result<Vec<&'a Frame>> {
        let frames: Vec<_> = log.frames.iter().filter(|f| self.contains(f.time)).collect();
        if frames.is_empty() {
            return Err(Error::EmptyWindow {
                start: self.start,
                end: self.end,
            });
        }
        Ok(frames)
    }
}

/// Forward-difference jerk, one element shorter than the input.
pub fn jerk_profile(accel: &[f64], dt: f64) -> Result<Vec<f64>> {
    if accel.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: accel.len(),
            min: 2,
        });
    }
    Ok(accel.windows(2).map(|w| (w[1] - w[0]) / dt).collect())
}

/// Largest |jerk| of each platoon vehicle (index 0 is the leader) over the
/// window.
pub fn max_jerk(log: &TrajectoryLog, window: Window) -> Result<Vec<f64>> {
    let frames = window.frames(log)?;
    (PLATOON_LEADER..log.n_vehicles())
        .map(|id| {
            let accel: Vec<f64> = frames.iter().map(|f| f.vehicles[id].accel).collect();
            let jerk = jerk_profile(&accel, log.dt)?;
            Ok(jerk.iter().fold(0.0, |m: f64, j| m.max(j.abs())))
        })
        .collect()
}

fn check_platoon_vehicle(log: &TrajectoryLog, vehicle: usize) -> Result<()> {
    if vehicle < PLATOON_LEADER || vehicle >= log.n_vehicles() {
        return Err(Error::UnknownVehicle { id: vehicle });
    }
    Ok(())
}

/// Leader speed minus the vehicle's speed at each observation in the window.
pub fn speed_error_series(log: &TrajectoryLog, vehicle: usize, window: Window) -> Result<Vec<f64>> {
    check_platoon_vehicle(log, vehicle)?;
    Ok(window
        .frames(log)?
        .iter()
        .map(|f| f.vehicles[PLATOON_LEADER].speed - f.vehicles[vehicle].speed)
        .collect())
}

/// Reference against which gap deviations are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapReference {
    /// The platoon leader's own gap, mirroring the speed error.
    #[default]
    PlatoonLeader,
    /// The vehicle's own model target gap at that instant.
    SafeGap,
}

pub fn gap_error_series(
    log: &TrajectoryLog,
    vehicle: usize,
    window: Window,
    reference: GapReference,
) -> Result<Vec<f64>> {
    check_platoon_vehicle(log, vehicle)?;
    let gap_of = |f: &Frame, id: usize| f.vehicles[id].gap.unwrap_or(f64::NAN);
    Ok(window
        .frames(log)?
        .iter()
        .map(|f| match reference {
            GapReference::PlatoonLeader => gap_of(f, PLATOON_LEADER) - gap_of(f, vehicle),
            GapReference::SafeGap => {
                let own = &f.vehicles[vehicle];
                let pred = &f.vehicles[vehicle - 1];
                gap_of(f, vehicle) - log.model.safe_gap(own.speed, pred.speed)
            }
        })
        .collect())
}

/// Sum over vehicles and observations of |error|.
pub fn l1_sum<S: AsRef<[f64]>>(errors: &[S]) -> f64 {
    errors
        .iter()
        .map(|row| row.as_ref().iter().map(|e| e.abs()).sum::<f64>())
        .sum()
}

/// Sum over vehicles of the Euclidean norm of that vehicle's errors.
pub fn l2_sum<S: AsRef<[f64]>>(errors: &[S]) -> f64 {
    errors
        .iter()
        .map(|row| libm::sqrt(row.as_ref().iter().map(|e| e * e).sum::<f64>()))
        .sum()
}

fn followers(log: &TrajectoryLog) -> core::ops::Range<usize> {
    PLATOON_LEADER + 1..log.n_vehicles()
}

/// `(l1, l2)` of the speed error over all followers.
pub fn speed_error_sums(log: &TrajectoryLog, window: Window) -> Result<(f64, f64)> {
    window.frames(log)?;
    let errors = followers(log)
        .map(|i| speed_error_series(log, i, window))
        .collect::<Result<Vec<_>>>()?;
    Ok((l1_sum(&errors), l2_sum(&errors)))
}

/// `(l1, l2)` of the gap error over all followers.
pub fn gap_error_sums(log: &TrajectoryLog, window: Window, reference: GapReference) -> Result<(f64, f64)> {
    window.frames(log)?;
    let errors = followers(log)
        .map(|i| gap_error_series(log, i, window, reference))
        .collect::<Result<Vec<_>>>()?;
    Ok((l1_sum(&errors), l2_sum(&errors)))
}

/// Per-model summary over an evaluation window.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub model: &'static str,
    /// Platoon leader first.
    pub max_jerk: Vec<f64>,
    pub l1_speed: f64,
    pub l2_speed: f64,
    pub l1_gap: f64,
    pub l2_gap: f64,
    pub local_stable: Option<bool>,
    pub string_stable: Option<bool>,
    pub window: Window,
}

impl MetricsReport {
    pub fn overall_max_jerk(&self) -> f64 {
        self.max_jerk.iter().copied().fold(0.0, f64::max)
    }
}

pub fn metrics_report(log: &TrajectoryLog, window: Window, reference: GapReference) -> Result<MetricsReport> {
    let (l1_speed, l2_speed) = speed_error_sums(log, window)?;
    let (l1_gap, l2_gap) = gap_error_sums(log, window, reference)?;
    Ok(MetricsReport {
        model: log.model.name(),
        max_jerk: max_jerk(log, window)?,
        l1_speed,
        l2_speed,
        l1_gap,
        l2_gap,
        local_stable: None,
        string_stable: None,
        window,
    })
}

/// Peak tolerance when comparing successive vehicles (m/s).
pub const STRING_TOLERANCE: f64 = 1e-6;
/// A response has decayed once it stays below this fraction of its peak.
pub const DECAY_FRACTION: f64 = 0.05;
/// Span at the end of the run over which the decay must hold (s).
pub const SETTLE_TIME: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub local_stable: bool,
    pub string_stable: bool,
    /// Peak |response| per platoon vehicle, leader first.
    pub peaks: Vec<f64>,
    /// Largest |response| within the final settle span, leader first.
    pub residuals: Vec<f64>,
}

/// Peaks that never grow from one vehicle to the next.
pub fn is_string_stable(peaks: &[f64]) -> bool {
    peaks.windows(2).all(|w| w[1] <= w[0] + STRING_TOLERANCE)
}

/// Response of every platoon vehicle to the perturbation.
///
/// The response of vehicle `i` is its speed error to its predecessor in
/// `perturbed` minus the same error in `baseline`, the identical run without
/// the perturbation, from the perturbation start onward. Subtracting the
/// baseline removes whatever the schedule itself excites.
pub fn perturbation_response(perturbed: &TrajectoryLog, baseline: &TrajectoryLog) -> Result<Vec<Vec<(f64, f64)>>> {
    let p = perturbed.perturbation.ok_or(Error::NoPerturbation)?;
    if perturbed.frames.len() != baseline.frames.len() || perturbed.n_vehicles() != baseline.n_vehicles() {
        return Err(Error::invalid("baseline", "does not match the perturbed run"));
    }
    let error = |f: &Frame, i: usize| f.vehicles[i - 1].speed - f.vehicles[i].speed;
    Ok((PLATOON_LEADER..perturbed.n_vehicles())
        .map(|i| {
            perturbed
                .frames
                .iter()
                .zip(&baseline.frames)
                .filter(|(f, _)| f.time >= p.start - TIME_EPS)
                .map(|(f, b)| (f.time, error(f, i) - error(b, i)))
                .collect()
        })
        .collect())
}

/// Local and string stability from a perturbed run and its baseline.
///
/// Local: every vehicle's |response| stays below [`DECAY_FRACTION`] of its
/// peak over the last [`SETTLE_TIME`] seconds, which must fall after the
/// perturbation ends. String: peaks are non-increasing downstream.
pub fn stability_report(perturbed: &TrajectoryLog, baseline: &TrajectoryLog) -> Result<StabilityReport> {
    let p = perturbed.perturbation.ok_or(Error::NoPerturbation)?;
    let response = perturbation_response(perturbed, baseline)?;
    let end = perturbed.frames.last().map_or(0.0, |f| f.time);
    let settle_from = (end - SETTLE_TIME).max(p.end());
    let settled_in_run = end - p.end() >= SETTLE_TIME - TIME_EPS;

    let mut peaks = Vec::with_capacity(response.len());
    let mut residuals = Vec::with_capacity(response.len());
    let mut local_stable = true;
    for series in &response {
        let peak = series.iter().fold(0.0, |m: f64, (_, e)| m.max(e.abs()));
        let residual = series
            .iter()
            .filter(|(t, _)| *t >= settle_from - TIME_EPS)
            .fold(0.0, |m: f64, (_, e)| m.max(e.abs()));
        if peak > 0.0 && (!settled_in_run || residual >= DECAY_FRACTION * peak) {
            local_stable = false;
        }
        peaks.push(peak);
        residuals.push(residual);
    }
    Ok(StabilityReport {
        local_stable,
        string_stable: is_string_stable(&peaks),
        peaks,
        residuals,
    })
}

/// Upper end of the IDM equilibrium gap search (m).
pub const IDM_GAP_CUTOFF: f64 = 1e6;
/// Bisection stops once |accel| is below this (m/s²).
pub const IDM_ACCEL_TOLERANCE: f64 = 1e-10;
/// A state is an equilibrium if one step moves the speed by at most this.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-9;

/// Gap at which the model holds speed `v` behind a lead at the same speed.
///
/// IADM: `s0 + v*dt`. IDM: root of the acceleration in the gap, found by
/// bisection on `[s0, IDM_GAP_CUTOFF]`; at the free-flow speed the root is
/// at infinity and the cutoff is returned.
pub fn equilibrium_gap(model: &CarFollowingModel, v: f64) -> Result<f64> {
    match model {
        CarFollowingModel::Iadm(p) => Ok(p.s0 + v * p.dt),
        CarFollowingModel::Idm(p) => {
            if v >= p.v_freeflow {
                return Ok(IDM_GAP_CUTOFF);
            }
            let f = |gap: f64| idm::idm_accel(p, v, v, gap);
            let (mut lo, mut hi) = (p.s0, IDM_GAP_CUTOFF);
            let (f_lo, f_hi) = (f(lo)?, f(hi)?);
            if f_lo.abs() <= IDM_ACCEL_TOLERANCE {
                return Ok(lo);
            }
            if !(f_lo < 0.0 && f_hi > 0.0) {
                return Err(Error::Bracket { speed: v });
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let value = f(mid)?;
                if value.abs() <= IDM_ACCEL_TOLERANCE {
                    return Ok(mid);
                }
                if value < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Steps the model once from its analytic equilibrium at speed `v`.
pub fn equilibrium_check(model: &CarFollowingModel, v: f64) -> Result<bool> {
    if !(v >= 0.0 && v <= model.v_freeflow()) {
        return Err(Error::invalid("speed", "must lie in [0, v_freeflow]"));
    }
    let gap = equilibrium_gap(model, v)?;
    let lead = PerceivedLead::new(gap, v, LeadSource::Comm);
    let v_next = match model {
        CarFollowingModel::Iadm(p) => iadm::next_speed(p, IadmInput { v, lead })?.v_next,
        CarFollowingModel::Idm(p) => idm::idm_next_speed(p, v, &lead)?.0,
    };
    Ok((v_next - v).abs() <= EQUILIBRIUM_TOLERANCE)
}
