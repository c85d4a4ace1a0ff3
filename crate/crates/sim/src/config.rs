//! Scenario files.
//!
//! A scenario is a TOML document with `[model]`, `[platoon]`, `[schedule]`,
//! `[link]` and an optional `[perturbation]` section. Units are SI.

use std::fs;
use std::path::{Path, PathBuf};

use iadm_core::{
    CarFollowingModel, IadmParams, IdmParams, LeadSchedule, LinkConfig, Perturbation, ScenarioConfig, Segment,
    SegmentMode, SensingSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Scenarios shipped with the binary, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("table1_iadm", include_str!("../configs/table1_iadm.toml")),
    ("table1_idm", include_str!("../configs/table1_idm.toml")),
    ("stability_iadm", include_str!("../configs/stability_iadm.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelSection,
    pub platoon: PlatoonSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSection>,
    #[serde(default)]
    pub link: LinkSection,
    pub schedule: ScheduleSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSection {
    Iadm {
        a_max: f64,
        b_max: f64,
        s0: f64,
        k: f64,
        dt: f64,
        v_freeflow: f64,
    },
    Idm {
        a_max: f64,
        b_max: f64,
        s0: f64,
        #[serde(rename = "T")]
        time_headway: f64,
        delta: f64,
        v_freeflow: f64,
        dt: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatoonSection {
    pub n_followers: usize,
    pub initial_positions: Vec<f64>,
    pub initial_speeds: Vec<f64>,
    #[serde(default = "default_length")]
    pub vehicle_length: f64,
    pub duration: f64,
    #[serde(default = "default_sensor_range")]
    pub sensor_range: f64,
    #[serde(default = "default_comm_range")]
    pub comm_range: f64,
}

fn default_length() -> f64 {
    5.0
}

fn default_sensor_range() -> f64 {
    SensingSpec::default().sensor_range
}

fn default_comm_range() -> f64 {
    SensingSpec::default().comm_range
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub delay_steps: usize,
    pub drop_probability: f64,
    pub seed: u64,
}

impl Default for LinkSection {
    fn default() -> Self {
        let link = LinkConfig::default();
        Self {
            delay_steps: link.delay_steps,
            drop_probability: link.drop_probability,
            seed: link.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    pub start: f64,
    pub delta_speed: f64,
    pub hold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum SegmentSpec {
    Hold { speed: f64, duration: f64 },
    Ramp { accel: f64, target: f64, duration: f64 },
}

impl ScenarioFile {
    pub fn into_config(self) -> Result<ScenarioConfig, SimError> {
        let model = match self.model {
            ModelSection::Iadm {
                a_max,
                b_max,
                s0,
                k,
                dt,
                v_freeflow,
            } => CarFollowingModel::Iadm(IadmParams {
                a_max,
                b_max,
                s0,
                k,
                dt,
                v_freeflow,
            }),
            ModelSection::Idm {
                a_max,
                b_max,
                s0,
                time_headway,
                delta,
                v_freeflow,
                dt,
            } => CarFollowingModel::Idm(IdmParams {
                a_max,
                b_max,
                s0,
                time_headway,
                delta,
                v_freeflow,
                dt,
            }),
        };
        let segments = self
            .schedule
            .segments
            .iter()
            .map(|s| match *s {
                SegmentSpec::Hold { speed, duration } => Segment::hold(speed, duration),
                SegmentSpec::Ramp {
                    accel,
                    target,
                    duration,
                } => Segment::ramp(accel, target, duration),
            })
            .collect();
        let start_speed = self.platoon.initial_speeds.first().copied().unwrap_or(0.0);
        let config = ScenarioConfig {
            model,
            n_followers: self.platoon.n_followers,
            initial_positions: self.platoon.initial_positions,
            initial_speeds: self.platoon.initial_speeds,
            vehicle_length: self.platoon.vehicle_length,
            schedule: LeadSchedule::new(start_speed, segments)?,
            duration: self.platoon.duration,
            sensing: SensingSpec {
                sensor_range: self.platoon.sensor_range,
                comm_range: self.platoon.comm_range,
            },
            link: LinkConfig {
                delay_steps: self.link.delay_steps,
                drop_probability: self.link.drop_probability,
                seed: self.link.seed,
            },
            perturbation: self.perturbation.map(|p| Perturbation {
                start: p.start,
                delta_speed: p.delta_speed,
                hold: p.hold,
            }),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_config(config: &ScenarioConfig) -> Self {
        let model = match config.model {
            CarFollowingModel::Iadm(p) => ModelSection::Iadm {
                a_max: p.a_max,
                b_max: p.b_max,
                s0: p.s0,
                k: p.k,
                dt: p.dt,
                v_freeflow: p.v_freeflow,
            },
            CarFollowingModel::Idm(p) => ModelSection::Idm {
                a_max: p.a_max,
                b_max: p.b_max,
                s0: p.s0,
                time_headway: p.time_headway,
                delta: p.delta,
                v_freeflow: p.v_freeflow,
                dt: p.dt,
            },
        };
        let segments = config
            .schedule
            .segments()
            .iter()
            .map(|s| match s.mode {
                SegmentMode::Hold { speed } => SegmentSpec::Hold {
                    speed,
                    duration: s.duration,
                },
                SegmentMode::Ramp { accel, target } => SegmentSpec::Ramp {
                    accel,
                    target,
                    duration: s.duration,
                },
            })
            .collect();
        Self {
            model,
            platoon: PlatoonSection {
                n_followers: config.n_followers,
                initial_positions: config.initial_positions.clone(),
                initial_speeds: config.initial_speeds.clone(),
                vehicle_length: config.vehicle_length,
                duration: config.duration,
                sensor_range: config.sensing.sensor_range,
                comm_range: config.sensing.comm_range,
            },
            perturbation: config.perturbation.map(|p| PerturbationSection {
                start: p.start,
                delta_speed: p.delta_speed,
                hold: p.hold,
            }),
            link: LinkSection {
                delay_steps: config.link.delay_steps,
                drop_probability: config.link.drop_probability,
                seed: config.link.seed,
            },
            schedule: ScheduleSection { segments },
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse(text: &str) -> Result<ScenarioConfig, SimError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
    file.into_config()
}

/// Largest link seed a scenario file can hold; TOML integers are signed.
pub const MAX_SEED: u64 = i64::MAX as u64;

/// Canonical TOML for a config. Parsing the result gives back the same
/// config.
pub fn to_toml(config: &ScenarioConfig) -> Result<String, SimError> {
    if config.link.seed > MAX_SEED {
        return Err(SimError::Validation(format!(
            "link seed {} exceeds the largest storable seed {MAX_SEED}",
            config.link.seed
        )));
    }
    toml::to_string(&ScenarioFile::from_config(config)).map_err(|e| SimError::Validation(e.to_string()))
}

/// A scenario loaded from disk or from the bundled set.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    /// Path as given, or the bundled name.
    pub origin: PathBuf,
    pub text: String,
    pub config: ScenarioConfig,
}

impl LoadedScenario {
    /// Short label used for output file names.
    pub fn label(&self) -> String {
        self.origin
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_owned())
    }
}

/// Reads `path`; a path that does not exist but names a bundled scenario
/// loads the bundled copy.
pub fn load(path: &Path) -> Result<LoadedScenario, SimError> {
    let text = if path.exists() {
        fs::read_to_string(path).map_err(|e| SimError::io(path, e))?
    } else if let Some((_, text)) = BUNDLED.iter().find(|(name, _)| Path::new(name) == path) {
        (*text).to_owned()
    } else {
        return Err(SimError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled scenario"),
        ));
    };
    let config = parse(&text).map_err(|e| e.in_file(path))?;
    Ok(LoadedScenario {
        origin: path.to_path_buf(),
        text,
        config,
    })
}
