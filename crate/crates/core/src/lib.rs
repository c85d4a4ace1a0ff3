//! Longitudinal control models for connected and automated vehicles.
//!
//! The crate holds the Information-Aware Driver Model (IADM), a discrete
//! Intelligent Driver Model (IDM) baseline, perception fusion with a
//! delayed and lossy V2X link, a fixed-step platoon simulator and the
//! metrics used to compare the two models. Everything here is `no_std`
//! with `alloc`; file formats and the command line live in `iadm-sim`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod error;
pub mod iadm;
pub mod idm;
pub mod model;
pub mod perception;
pub mod platoon;
pub mod reference;
pub mod schedule;

pub use error::{Error, Result};
pub use iadm::{IadmInput, IadmParams, IadmStepResult};
pub use idm::IdmParams;
pub use model::{Branch, CarFollowingModel, ModelStep};
pub use perception::link::{Link, LinkConfig, LinkStats};
pub use perception::{LeadChannel, LeadSource, PerceivedLead, SensingSpec};
pub use platoon::{run_scenario, Platoon, ScenarioConfig, TrajectoryLog, VehicleState};
pub use schedule::{LeadSchedule, Perturbation, Segment, SegmentMode};

/// Slack used when comparing simulation times against schedule and window
/// boundaries. Times are `step as f64 * dt`, so they carry rounding noise.
pub const TIME_EPS: f64 = 1e-9;
