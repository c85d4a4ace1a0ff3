//! Reference scenario: four-vehicle CACC platoon behind a scripted vehicle
//! that cycles 15 -> 25 -> 15 -> 20 m/s over 200 s.

use alloc::vec;

use crate::iadm::IadmParams;
use crate::idm::IdmParams;
use crate::model::CarFollowingModel;
use crate::perception::link::LinkConfig;
use crate::perception::SensingSpec;
use crate::platoon::ScenarioConfig;
use crate::schedule::{LeadSchedule, Perturbation, Segment};

pub const VEHICLE_LENGTH: f64 = 5.0;
pub const DURATION: f64 = 200.0;

/// Hold 15 for 30 s, ramp to 25, hold 30 s, ramp to 15, hold 30 s, ramp to
/// 20, hold to 200 s. Ramps run at 0.5 m/s².
pub fn reference_schedule() -> LeadSchedule {
    LeadSchedule::new(
        15.0,
        vec![
            Segment::hold(15.0, 30.0),
            Segment::ramp(0.5, 25.0, 20.0),
            Segment::hold(25.0, 30.0),
            Segment::ramp(-0.5, 15.0, 20.0),
            Segment::hold(15.0, 30.0),
            Segment::ramp(0.5, 20.0, 10.0),
            Segment::hold(20.0, 60.0),
        ],
    )
    .expect("reference schedule is valid")
}

pub fn table1_iadm_model() -> CarFollowingModel {
    CarFollowingModel::Iadm(IadmParams::default())
}

pub fn table1_idm_model() -> CarFollowingModel {
    CarFollowingModel::Idm(IdmParams::default())
}

/// Scripted vehicle at 80 m, platoon at 60/40/20/0 m, everyone at 15 m/s,
/// 100 ms lossless link.
pub fn table1(model: CarFollowingModel) -> ScenarioConfig {
    ScenarioConfig {
        model,
        n_followers: 3,
        initial_positions: vec![80.0, 60.0, 40.0, 20.0, 0.0],
        initial_speeds: vec![15.0; 5],
        vehicle_length: VEHICLE_LENGTH,
        schedule: reference_schedule(),
        duration: DURATION,
        sensing: SensingSpec::default(),
        link: LinkConfig::default(),
        perturbation: None,
    }
}

/// [`table1`] with a -5 m/s dip at 100 s held for 5 s.
pub fn stability(model: CarFollowingModel) -> ScenarioConfig {
    ScenarioConfig {
        perturbation: Some(Perturbation::default()),
        ..table1(model)
    }
}
