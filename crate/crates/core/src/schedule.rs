//! Scripted speed profile of the vehicle ahead of the platoon leader.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::TIME_EPS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentMode {
    Hold {
        speed: f64,
    },
    /// Constant acceleration from the previous end speed until `target`,
    /// then `target` for the rest of the segment.
    Ramp {
        accel: f64,
        target: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub mode: SegmentMode,
}

impl Segment {
    pub fn hold(speed: f64, duration: f64) -> Self {
        Self {
            duration,
            mode: SegmentMode::Hold { speed },
        }
    }

    pub fn ramp(accel: f64, target: f64, duration: f64) -> Self {
        Self {
            duration,
            mode: SegmentMode::Ramp { accel, target },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeadSchedule {
    start_speed: f64,
    segments: Vec<Segment>,
}

impl LeadSchedule {
    /// `start_speed` is where a leading ramp starts from.
    pub fn new(start_speed: f64, segments: Vec<Segment>) -> Result<Self> {
        let schedule = Self { start_speed, segments };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn start_speed(&self) -> f64 {
        self.start_speed
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start times of every segment after the first.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.segments.len().saturating_sub(1));
        for seg in &self.segments[..self.segments.len().saturating_sub(1)] {
            t += seg.duration;
            out.push(t);
        }
        out
    }

    /// Times at which the scripted acceleration changes: segment starts
    /// plus the instant a ramp reaches its target early.
    pub fn transitions(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t0 = 0.0;
        let mut prev = self.start_speed;
        for seg in &self.segments {
            if t0 > 0.0 {
                out.push(t0);
            }
            if let SegmentMode::Ramp { accel, target } = seg.mode {
                let reach = (target - prev).abs() / accel.abs();
                if reach < seg.duration - TIME_EPS {
                    out.push(t0 + reach);
                }
            }
            prev = end_speed(seg);
            t0 += seg.duration;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_speed >= 0.0 && self.start_speed.is_finite()) {
            return Err(Error::invalid("schedule", "start speed must be non-negative"));
        }
        if self.segments.is_empty() {
            return Err(Error::invalid("schedule", "needs at least one segment"));
        }
        let mut prev = self.start_speed;
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return Err(Error::invalid(
                    "schedule",
                    format!("segment {i}: duration must be positive"),
                ));
            }
            match seg.mode {
                SegmentMode::Hold { speed } => {
                    if !(speed >= 0.0 && speed.is_finite()) {
                        return Err(Error::invalid(
                            "schedule",
                            format!("segment {i}: hold speed must be non-negative"),
                        ));
                    }
                }
                SegmentMode::Ramp { accel, target } => {
                    if !(target >= 0.0 && target.is_finite()) {
                        return Err(Error::invalid(
                            "schedule",
                            format!("segment {i}: ramp target must be non-negative"),
                        ));
                    }
                    let change = target - prev;
                    if change != 0.0 && (accel == 0.0 || accel.signum() != change.signum()) {
                        return Err(Error::invalid(
                            "schedule",
                            format!(
                                "segment {i}: ramp from {prev} to {target} m/s needs acceleration of matching sign"
                            ),
                        ));
                    }
                    if change != 0.0 && change.abs() / accel.abs() > seg.duration + TIME_EPS {
                        return Err(Error::invalid(
                            "schedule",
                            format!(
                                "segment {i}: ramp does not reach {target} m/s within {} s",
                                seg.duration
                            ),
                        ));
                    }
                }
            }
            prev = end_speed(seg);
        }
        Ok(())
    }

    /// Scripted speed at time `t`. A query on a boundary belongs to the later
    /// segment.
    pub fn speed_at(&self, t: f64) -> Result<f64> {
        let end = self.duration();
        if !(t >= -TIME_EPS && t <= end + TIME_EPS) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        let mut t0 = 0.0;
        let mut prev = self.start_speed;
        let last = self.segments.len() - 1;
        for (i, seg) in self.segments.iter().enumerate() {
            let t1 = t0 + seg.duration;
            if i == last || t < t1 - TIME_EPS {
                return Ok(segment_speed(prev, seg, (t - t0).max(0.0)));
            }
            prev = end_speed(seg);
            t0 = t1;
        }
        unreachable!("validated schedule has at least one segment")
    }
}

/// Free-function form of [`LeadSchedule::speed_at`].
pub fn schedule_speed_at(schedule: &LeadSchedule, t: f64) -> Result<f64> {
    schedule.speed_at(t)
}

fn segment_speed(prev: f64, seg: &Segment, elapsed: f64) -> f64 {
    match seg.mode {
        SegmentMode::Hold { speed } => speed,
        SegmentMode::Ramp { accel, target } => {
            let v = prev + accel * elapsed;
            if accel >= 0.0 {
                v.min(target)
            } else {
                v.max(target)
            }
        }
    }
}

fn end_speed(seg: &Segment) -> f64 {
    match seg.mode {
        SegmentMode::Hold { speed } => speed,
        SegmentMode::Ramp { target, .. } => target,
    }
}

/// Temporary speed offset applied to the scripted profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub start: f64,
    pub delta_speed: f64,
    pub hold: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            start: 100.0,
            delta_speed: -5.0,
            hold: 5.0,
        }
    }
}

impl Perturbation {
    pub fn end(&self) -> f64 {
        self.start + self.hold
    }

    pub fn validate(&self, duration: f64) -> Result<()> {
        if !(self.start >= 0.0 && self.start.is_finite()) {
            return Err(Error::invalid("perturbation", "start must be non-negative"));
        }
        if self.start > duration + TIME_EPS {
            return Err(Error::invalid(
                "perturbation",
                format!("start {} s is beyond the run duration {duration} s", self.start),
            ));
        }
        if !(self.hold > 0.0 && self.hold.is_finite()) {
            return Err(Error::invalid("perturbation", "hold must be positive"));
        }
        if !self.delta_speed.is_finite() {
            return Err(Error::invalid("perturbation", "delta_speed must be finite"));
        }
        Ok(())
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.start - TIME_EPS && t < self.end() - TIME_EPS
    }
}

/// Adds the perturbation inside `[start, start + hold)`, never below zero.
pub fn inject_perturbation(speed: f64, t: f64, perturbation: Option<&Perturbation>) -> f64 {
    match perturbation {
        Some(p) if p.is_active(t) => (speed + p.delta_speed).max(0.0),
        _ => speed,
    }
}
