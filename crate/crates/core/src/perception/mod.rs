//! Lead-vehicle perception: fusing sensor range, communication range and the
//! measured gap into a single view of the vehicle ahead.

pub mod link;

use crate::error::{Error, Result};

/// Reliable coverage distances of the on-board sensors and the V2X radio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingSpec {
    pub sensor_range: f64,
    pub comm_range: f64,
}

impl SensingSpec {
    pub fn new(sensor_range: f64, comm_range: f64) -> Result<Self> {
        let spec = Self {
            sensor_range,
            comm_range,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sensor_range > 0.0 && self.sensor_range.is_finite()) {
            return Err(Error::invalid("sensor_range", "must be positive and finite"));
        }
        if !(self.comm_range > 0.0 && self.comm_range.is_finite()) {
            return Err(Error::invalid("comm_range", "must be positive and finite"));
        }
        Ok(())
    }

    /// Distance reported when nothing is inside either coverage area.
    pub fn free_gap(&self) -> f64 {
        self.sensor_range.max(self.comm_range)
    }
}

impl Default for SensingSpec {
    fn default() -> Self {
        Self {
            sensor_range: 120.0,
            comm_range: 300.0,
        }
    }
}

/// Where the lead speed in a [`PerceivedLead`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeadSource {
    Sensor,
    Comm,
    FreeFlow,
}

/// Channel a lead observation arrived on, before the free-flow rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeadChannel {
    Sensor,
    Comm,
}

impl From<LeadChannel> for LeadSource {
    fn from(channel: LeadChannel) -> Self {
        match channel {
            LeadChannel::Sensor => LeadSource::Sensor,
            LeadChannel::Comm => LeadSource::Comm,
        }
    }
}

/// What a follower knows about its immediate upstream vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceivedLead {
    pub gap: f64,
    pub lead_speed: f64,
    pub source: LeadSource,
}

impl PerceivedLead {
    pub fn new(gap: f64, lead_speed: f64, source: LeadSource) -> Self {
        Self {
            gap,
            lead_speed,
            source,
        }
    }

    /// Nothing ahead: the gap is the widest coverage and the lead speed is
    /// the roadway free-flow speed.
    pub fn free_flow(sensing: &SensingSpec, v_freeflow: f64) -> Self {
        Self {
            gap: sensing.free_gap(),
            lead_speed: v_freeflow,
            source: LeadSource::FreeFlow,
        }
    }
}

/// Minimum available gap in front of the vehicle.
///
/// With a measured gap this is `min(sensor_range, comm_range, measured)`.
/// Without one the vehicle sees open road up to the wider of the two
/// coverage distances.
pub fn fuse_gap(sensor_range: f64, comm_range: f64, measured_gap: Option<f64>) -> Result<f64> {
    match measured_gap {
        Some(gap) if gap < 0.0 => Err(Error::NegativeGap { gap }),
        Some(gap) => Ok(sensor_range.min(comm_range).min(gap)),
        None => Ok(sensor_range.max(comm_range)),
    }
}

/// Lead speed the model should react to.
///
/// A detected lead that constrains the vehicle contributes its own speed;
/// otherwise the free-flow speed stands in for it.
pub fn effective_lead_speed(
    measured_gap: Option<f64>,
    lead_speed: f64,
    free_flow_speed: f64,
    constrained: bool,
    channel: LeadChannel,
) -> (f64, LeadSource) {
    if measured_gap.is_some() && constrained {
        (lead_speed, channel.into())
    } else {
        (free_flow_speed, LeadSource::FreeFlow)
    }
}

/// Builds the perceived lead for one follower.
///
/// `true_gap` and `true_lead_speed` are the physical state ahead (seen by
/// the sensors without delay when in range); `comm` is the latest message
/// delivered over the V2X link. The communicated lead speed is preferred
/// whenever the message places the lead inside communication range.
pub fn perceive(
    sensing: &SensingSpec,
    v_freeflow: f64,
    true_gap: f64,
    true_lead_speed: f64,
    comm: &PerceivedLead,
) -> Result<PerceivedLead> {
    if true_gap < 0.0 {
        return Err(Error::NegativeGap { gap: true_gap });
    }
    let sensed = (true_gap <= sensing.sensor_range).then_some(true_gap);
    let communicated = (comm.source != LeadSource::FreeFlow && comm.gap <= sensing.comm_range).then_some(comm.gap);

    let measured = sensed.or(communicated);
    let gap = fuse_gap(sensing.sensor_range, sensing.comm_range, measured)?;

    let (raw_speed, channel) = if communicated.is_some() {
        (comm.lead_speed, LeadChannel::Comm)
    } else {
        (true_lead_speed, LeadChannel::Sensor)
    };
    let constrained = raw_speed < v_freeflow;
    let (lead_speed, source) = effective_lead_speed(measured, raw_speed, v_freeflow, constrained, channel);

    Ok(PerceivedLead {
        gap,
        lead_speed,
        source,
    })
}
