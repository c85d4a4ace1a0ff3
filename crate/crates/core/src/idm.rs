//! Intelligent Driver Model as a difference equation, used as the baseline.

use crate::error::{Error, Result};
use crate::perception::PerceivedLead;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmParams {
    pub a_max: f64,
    /// Comfortable braking deceleration, as a magnitude.
    pub b_max: f64,
    pub s0: f64,
    /// Desired time headway `T` (s).
    pub time_headway: f64,
    /// Acceleration exponent.
    pub delta: f64,
    pub v_freeflow: f64,
    pub dt: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            a_max: 1.5,
            b_max: 1.5,
            s0: 2.0,
            time_headway: 0.1,
            delta: 4.0,
            v_freeflow: 25.0,
            dt: 0.1,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a_max", self.a_max),
            ("b_max", self.b_max),
            ("s0", self.s0),
            ("T", self.time_headway),
            ("delta", self.delta),
            ("v_freeflow", self.v_freeflow),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        if self.delta < 1.0 {
            return Err(Error::invalid("delta", "must be at least 1"));
        }
        Ok(())
    }
}

/// Desired gap `s0 + max(0, v*T + v*dv / (2*sqrt(a*b)))`.
pub fn idm_desired_gap(params: &IdmParams, v: f64, lead_speed: f64) -> f64 {
    let interaction = v * params.time_headway + v * (v - lead_speed) / (2.0 * libm::sqrt(params.a_max * params.b_max));
    params.s0 + interaction.max(0.0)
}

/// IDM acceleration for a given gap.
pub fn idm_accel(params: &IdmParams, v: f64, lead_speed: f64, gap: f64) -> Result<f64> {
    if gap <= 0.0 {
        return Err(Error::NonPositiveGap { gap });
    }
    let free_term = libm::pow(v / params.v_freeflow, params.delta);
    let ratio = idm_desired_gap(params, v, lead_speed) / gap;
    Ok(params.a_max * (1.0 - free_term - ratio * ratio))
}

/// One Euler step; the only limit applied is the zero speed floor.
pub fn idm_next_speed(params: &IdmParams, v: f64, lead: &PerceivedLead) -> Result<(f64, f64)> {
    let accel = idm_accel(params, v, lead.lead_speed, lead.gap)?;
    Ok(((v + accel * params.dt).max(0.0), accel))
}
