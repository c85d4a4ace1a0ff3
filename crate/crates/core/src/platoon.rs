//! Fixed-step platoon simulation.
//!
//! Vehicle 0 is the scripted vehicle ahead of the platoon, vehicle 1 the
//! platoon leader, and higher ids the followers. Every vehicle updates from
//! the same pre-step snapshot, and positions advance with the new speed.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Branch, CarFollowingModel};
use crate::perception::link::{Link, LinkConfig, LinkStats};
use crate::perception::{perceive, LeadSource, PerceivedLead, SensingSpec};
use crate::schedule::{inject_perturbation, LeadSchedule, Perturbation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Front-bumper position (m).
    pub position: f64,
    pub speed: f64,
    pub accel: f64,
    pub length: f64,
}

impl VehicleState {
    pub fn new(position: f64, speed: f64, length: f64) -> Self {
        Self {
            position,
            speed,
            accel: 0.0,
            length,
        }
    }
}

/// Bumper-to-bumper gap from `follower` to `predecessor`.
pub fn bumper_gap(predecessor: &VehicleState, follower: &VehicleState) -> f64 {
    predecessor.position - follower.position - predecessor.length
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: CarFollowingModel,
    /// Followers behind the platoon leader.
    pub n_followers: usize,
    /// Scripted vehicle first, then the leader, then followers.
    pub initial_positions: Vec<f64>,
    pub initial_speeds: Vec<f64>,
    pub vehicle_length: f64,
    pub schedule: LeadSchedule,
    pub duration: f64,
    pub sensing: SensingSpec,
    pub link: LinkConfig,
    pub perturbation: Option<Perturbation>,
}

impl ScenarioConfig {
    pub fn dt(&self) -> f64 {
        self.model.dt()
    }

    /// Scripted vehicle, leader and followers.
    pub fn n_vehicles(&self) -> usize {
        self.n_followers + 2
    }

    pub fn n_steps(&self) -> usize {
        libm::round(self.duration / self.dt()) as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.sensing.validate()?;
        self.link.validate()?;
        self.schedule.validate()?;

        let n = self.n_vehicles();
        if self.initial_positions.len() != n {
            return Err(Error::invalid(
                "initial_positions",
                format!("expected {n} entries, found {}", self.initial_positions.len()),
            ));
        }
        if self.initial_speeds.len() != n {
            return Err(Error::invalid(
                "initial_speeds",
                format!("expected {n} entries, found {}", self.initial_speeds.len()),
            ));
        }
        if let Some(i) = self.initial_speeds.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(
                "initial_speeds",
                format!("entry {i} must be non-negative"),
            ));
        }
        if !(self.vehicle_length > 0.0 && self.vehicle_length.is_finite()) {
            return Err(Error::invalid("vehicle_length", "must be positive"));
        }
        for (i, pair) in self.initial_positions.windows(2).enumerate() {
            let gap = pair[0] - pair[1] - self.vehicle_length;
            if gap.is_nan() || gap <= 0.0 {
                return Err(Error::invalid(
                    "initial_positions",
                    format!("vehicle {} starts with non-positive gap {gap} m", i + 1),
                ));
            }
        }

        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", "must be non-negative"));
        }
        let scheduled = self.schedule.duration();
        // zero duration means "initial state only"
        if self.duration != 0.0 && (self.duration - scheduled).abs() > 1e-9 * scheduled.max(1.0) {
            return Err(Error::invalid(
                "duration",
                format!("{} s does not match the schedule total {scheduled} s", self.duration),
            ));
        }
        let steps = self.duration / self.dt();
        if (steps - libm::round(steps)).abs() > 1e-6 {
            return Err(Error::invalid(
                "duration",
                format!("{} s is not a whole number of {} s steps", self.duration, self.dt()),
            ));
        }
        if let Some(p) = &self.perturbation {
            p.validate(self.duration)?;
        }
        Ok(())
    }

    fn initial_states(&self) -> Vec<VehicleState> {
        self.initial_positions
            .iter()
            .zip(&self.initial_speeds)
            .map(|(&x, &v)| VehicleState::new(x, v, self.vehicle_length))
            .collect()
    }
}

/// One logged vehicle at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub position: f64,
    pub speed: f64,
    pub accel: f64,
    /// `None` for the scripted vehicle.
    pub gap: Option<f64>,
    /// IADM platoon vehicles after the first step.
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub vehicles: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub model: CarFollowingModel,
    pub dt: f64,
    pub perturbation: Option<Perturbation>,
    pub frames: Vec<Frame>,
    /// One entry per platoon vehicle, for the link feeding it.
    pub link_stats: Vec<LinkStats>,
}

impl TrajectoryLog {
    pub fn n_vehicles(&self) -> usize {
        self.frames.first().map_or(0, |f| f.vehicles.len())
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.frames.iter().map(|f| f.time)
    }

    pub fn series<F>(&self, vehicle: usize, field: F) -> Result<Vec<f64>>
    where
        F: Fn(&Sample) -> f64,
    {
        if vehicle >= self.n_vehicles() {
            return Err(Error::UnknownVehicle { id: vehicle });
        }
        Ok(self.frames.iter().map(|f| field(&f.vehicles[vehicle])).collect())
    }

    pub fn speeds(&self, vehicle: usize) -> Result<Vec<f64>> {
        self.series(vehicle, |s| s.speed)
    }

    pub fn accels(&self, vehicle: usize) -> Result<Vec<f64>> {
        self.series(vehicle, |s| s.accel)
    }

    pub fn gaps(&self, vehicle: usize) -> Result<Vec<f64>> {
        self.series(vehicle, |s| s.gap.unwrap_or(f64::NAN))
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.frames
            .iter()
            .flat_map(|f| f.vehicles.iter().filter_map(|s| s.gap))
            .reduce(f64::min)
    }
}

/// Result of advancing the whole platoon by one step.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatoonStep {
    pub states: Vec<VehicleState>,
    pub branches: Vec<Option<Branch>>,
}

/// Advances every vehicle one step from the common snapshot `states`.
///
/// `lead_speed` is the scripted vehicle's speed at `time_next`. `links[i]`
/// carries messages from vehicle `i` to vehicle `i + 1`.
pub fn step_platoon(
    states: &[VehicleState],
    lead_speed: f64,
    links: &mut [Link],
    model: &CarFollowingModel,
    sensing: &SensingSpec,
    time_next: f64,
) -> Result<PlatoonStep> {
    let dt = model.dt();
    let mut next = Vec::with_capacity(states.len());
    let mut branches = Vec::with_capacity(states.len());

    let scripted = &states[0];
    next.push(VehicleState {
        position: scripted.position + lead_speed * dt,
        speed: lead_speed,
        accel: (lead_speed - scripted.speed) / dt,
        length: scripted.length,
    });
    branches.push(None);

    for (i, pair) in states.windows(2).enumerate() {
        let (pred, own) = (&pair[0], &pair[1]);
        let gap = bumper_gap(pred, own);
        let broadcast = PerceivedLead::new(gap, pred.speed, LeadSource::Comm);
        let received = links[i].step(broadcast);
        let lead = perceive(sensing, model.v_freeflow(), gap, pred.speed, &received)?;
        let out = model.step(own.speed, lead)?;
        next.push(VehicleState {
            position: own.position + out.v_next * dt,
            speed: out.v_next,
            accel: out.accel,
            length: own.length,
        });
        branches.push(out.branch);
    }

    for (i, pair) in next.windows(2).enumerate() {
        let gap = bumper_gap(&pair[0], &pair[1]);
        if gap.is_nan() || gap <= 0.0 {
            return Err(Error::Collision {
                time: time_next,
                vehicle: i + 1,
                gap,
            });
        }
    }

    Ok(PlatoonStep { states: next, branches })
}

/// A running simulation.
#[derive(Debug, Clone)]
pub struct Platoon {
    config: ScenarioConfig,
    states: Vec<VehicleState>,
    links: Vec<Link>,
    step: usize,
}

impl Platoon {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let states = config.initial_states();
        let links = states
            .windows(2)
            .map(|pair| {
                let initial = PerceivedLead::new(bumper_gap(&pair[0], &pair[1]), pair[0].speed, LeadSource::Comm);
                Link::new(config.link, initial)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            states,
            links,
            step: 0,
        })
    }

    pub fn states(&self) -> &[VehicleState] {
        &self.states
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.dt()
    }

    pub fn link_stats(&self) -> Vec<LinkStats> {
        self.links.iter().map(Link::stats).collect()
    }

    /// Advances one step and returns the binding branch per vehicle.
    pub fn advance(&mut self) -> Result<Vec<Option<Branch>>> {
        let t_next = (self.step + 1) as f64 * self.config.dt();
        let scripted = self
            .config
            .schedule
            .speed_at(t_next.min(self.config.schedule.duration()))?;
        let lead_speed = inject_perturbation(scripted, t_next, self.config.perturbation.as_ref());
        let out = step_platoon(
            &self.states,
            lead_speed,
            &mut self.links,
            &self.config.model,
            &self.config.sensing,
            t_next,
        )?;
        self.states = out.states;
        self.step += 1;
        Ok(out.branches)
    }

    fn frame(&self, branches: &[Option<Branch>]) -> Frame {
        let vehicles = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| Sample {
                position: s.position,
                speed: s.speed,
                accel: s.accel,
                gap: (i > 0).then(|| bumper_gap(&self.states[i - 1], s)),
                branch: branches.get(i).copied().flatten(),
            })
            .collect();
        Frame {
            time: self.time(),
            vehicles,
        }
    }
}

/// Runs the configured number of steps and returns the full log.
pub fn run_scenario(config: &ScenarioConfig) -> Result<TrajectoryLog> {
    let steps = config.n_steps();
    let mut platoon = Platoon::new(config.clone())?;
    let mut frames = Vec::with_capacity(steps + 1);
    frames.push(platoon.frame(&[]));
    for _ in 0..steps {
        let branches = platoon.advance()?;
        frames.push(platoon.frame(&branches));
    }
    Ok(TrajectoryLog {
        model: config.model,
        dt: config.dt(),
        perturbation: config.perturbation,
        frames,
        link_stats: platoon.link_stats(),
    })
}
