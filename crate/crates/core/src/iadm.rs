//! Information-Aware Driver Model.
//!
//! The next speed is the smallest of three candidates: a comfortable
//! acceleration step, the free-flow speed, and the speed from which the
//! vehicle can still settle onto its dynamic safe gap with comfortable
//! deceleration.

use crate::error::{Error, Result};
use crate::model::Branch;
use crate::perception::PerceivedLead;

/// Model parameters. `a_max` and `b_max` are positive magnitudes; the sign
/// of deceleration is applied inside [`comfortable_decel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IadmParams {
    pub a_max: f64,
    pub b_max: f64,
    /// Standstill gap (m).
    pub s0: f64,
    /// Aggressiveness factor in (0, 1].
    pub k: f64,
    /// Update interval (s).
    pub dt: f64,
    pub v_freeflow: f64,
}

impl Default for IadmParams {
    fn default() -> Self {
        Self {
            a_max: 1.5,
            b_max: 1.5,
            s0: 2.0,
            k: 1.0,
            dt: 0.1,
            v_freeflow: 25.0,
        }
    }
}

impl IadmParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a_max", self.a_max),
            ("b_max", self.b_max),
            ("s0", self.s0),
            ("k", self.k),
            ("dt", self.dt),
            ("v_freeflow", self.v_freeflow),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        if self.k > 1.0 {
            return Err(Error::invalid("k", "must not exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IadmInput {
    pub v: f64,
    pub lead: PerceivedLead,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IadmStepResult {
    pub v_next: f64,
    /// Realized `(v_next - v) / dt`, after the actuator clamp.
    pub accel: f64,
    /// Candidate that was smallest before clamping.
    pub branch: Branch,
    pub s_safe: f64,
    pub s_net: f64,
}

/// Dynamic safe gap: standstill gap, one step of travel, and one step of
/// closing speed when approaching a slower lead.
pub fn safe_gap(params: &IadmParams, v: f64, lead_speed: f64) -> f64 {
    params.s0 + v * params.dt + ((v - lead_speed) * params.dt).max(0.0)
}

// Shared saturation term of the comfortable acceleration and deceleration:
// relative speed drives it, and only an exact speed match hands over to the
// distance from the safe gap.
fn comfort_level(params: &IadmParams, v: f64, lead_speed: f64, s_fgap: f64, s_safe: f64) -> f64 {
    let argument = if lead_speed != v {
        (lead_speed - v).abs()
    } else {
        (s_fgap - s_safe).abs()
    };
    libm::tanh(params.k * argument)
}

/// Comfortable acceleration, in `[0, a_max)`.
pub fn comfortable_accel(params: &IadmParams, v: f64, lead_speed: f64, s_fgap: f64, s_safe: f64) -> f64 {
    params.a_max * comfort_level(params, v, lead_speed, s_fgap, s_safe)
}

/// Comfortable deceleration, in `(-b_max, 0]`.
pub fn comfortable_decel(params: &IadmParams, v: f64, lead_speed: f64, s_fgap: f64, s_safe: f64) -> f64 {
    -params.b_max * comfort_level(params, v, lead_speed, s_fgap, s_safe)
}

/// One IADM update.
///
/// When the deceleration candidate has a negative radicand (the vehicle is
/// already inside its safe gap behind a slow lead) it is replaced by a
/// maximum-braking step. The realized acceleration is then clamped to
/// `[-b_max, a_max]`.
pub fn next_speed(params: &IadmParams, input: IadmInput) -> Result<IadmStepResult> {
    let IadmInput { v, lead } = input;
    if lead.gap < 0.0 {
        return Err(Error::NegativeGap { gap: lead.gap });
    }
    let dt = params.dt;
    let lead_speed = lead.lead_speed;

    let s_safe = safe_gap(params, v, lead_speed);
    let s_net = lead.gap - s_safe;
    let a_comf = comfortable_accel(params, v, lead_speed, lead.gap, s_safe);
    let b_comf = comfortable_decel(params, v, lead_speed, lead.gap, s_safe);

    let v_acc = v + a_comf * dt;
    let radicand = lead_speed * lead_speed - 2.0 * b_comf * s_net;
    let (v_dec, dec_branch) = if radicand >= 0.0 {
        (libm::sqrt(radicand), Branch::Decel)
    } else {
        ((v - params.b_max * dt).max(0.0), Branch::MaxBrake)
    };

    // ties resolve to the earlier candidate
    let mut candidate = v_acc;
    let mut branch = Branch::Accel;
    if params.v_freeflow < candidate {
        candidate = params.v_freeflow;
        branch = Branch::FreeFlow;
    }
    if v_dec < candidate {
        candidate = v_dec;
        branch = dec_branch;
    }

    let unclamped = candidate.max(0.0);
    let raw_accel = (unclamped - v) / dt;
    let (v_next, accel) = if raw_accel > params.a_max {
        (v + params.a_max * dt, params.a_max)
    } else if raw_accel < -params.b_max {
        ((v - params.b_max * dt).max(0.0), -params.b_max)
    } else {
        (unclamped, raw_accel)
    };

    Ok(IadmStepResult {
        v_next,
        accel,
        branch,
        s_safe,
        s_net,
    })
}
