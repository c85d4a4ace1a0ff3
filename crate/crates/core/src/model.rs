use crate::error::Result;
use crate::iadm::{self, IadmInput, IadmParams};
use crate::idm::{self, IdmParams};
use crate::perception::PerceivedLead;

/// Which IADM speed candidate was binding in a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Accel,
    FreeFlow,
    Decel,
    MaxBrake,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Accel => "Accel",
            Branch::FreeFlow => "FreeFlow",
            Branch::Decel => "Decel",
            Branch::MaxBrake => "MaxBrake",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CarFollowingModel {
    Iadm(IadmParams),
    Idm(IdmParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelStep {
    pub v_next: f64,
    pub accel: f64,
    pub branch: Option<Branch>,
}

impl CarFollowingModel {
    pub fn name(&self) -> &'static str {
        match self {
            CarFollowingModel::Iadm(_) => "IADM",
            CarFollowingModel::Idm(_) => "IDM",
        }
    }

    pub fn dt(&self) -> f64 {
        match self {
            CarFollowingModel::Iadm(p) => p.dt,
            CarFollowingModel::Idm(p) => p.dt,
        }
    }

    pub fn v_freeflow(&self) -> f64 {
        match self {
            CarFollowingModel::Iadm(p) => p.v_freeflow,
            CarFollowingModel::Idm(p) => p.v_freeflow,
        }
    }

    pub fn s0(&self) -> f64 {
        match self {
            CarFollowingModel::Iadm(p) => p.s0,
            CarFollowingModel::Idm(p) => p.s0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CarFollowingModel::Iadm(p) => p.validate(),
            CarFollowingModel::Idm(p) => p.validate(),
        }
    }

    /// Gap the model is steering towards.
    pub fn safe_gap(&self, v: f64, lead_speed: f64) -> f64 {
        match self {
            CarFollowingModel::Iadm(p) => iadm::safe_gap(p, v, lead_speed),
            CarFollowingModel::Idm(p) => idm::idm_desired_gap(p, v, lead_speed),
        }
    }

    /// Realized acceleration is `(v_next - v) / dt`; for IDM this differs
    /// from the model acceleration when the speed floor engages.
    pub fn step(&self, v: f64, lead: PerceivedLead) -> Result<ModelStep> {
        match self {
            CarFollowingModel::Iadm(p) => {
                let out = iadm::next_speed(p, IadmInput { v, lead })?;
                Ok(ModelStep {
                    v_next: out.v_next,
                    accel: out.accel,
                    branch: Some(out.branch),
                })
            }
            CarFollowingModel::Idm(p) => {
                let (v_next, _) = idm::idm_next_speed(p, v, &lead)?;
                Ok(ModelStep {
                    v_next,
                    accel: (v_next - v) / p.dt,
                    branch: None,
                })
            }
        }
    }
}
