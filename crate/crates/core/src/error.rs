use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A gap below zero reached a model or the fusion step.
    #[error("negative gap {gap} m: vehicles already overlap")]
    NegativeGap { gap: f64 },

    /// IDM divides by the gap, so it also rejects zero.
    #[error("non-positive gap {gap} m passed to IDM")]
    NonPositiveGap { gap: f64 },

    #[error("collision at t = {time} s: vehicle {vehicle} has gap {gap} m")]
    Collision { time: f64, vehicle: usize, gap: f64 },

    #[error("time {t} s outside schedule range [0, {end}] s")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("series of length {len} is too short; need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("unknown vehicle {id}")]
    UnknownVehicle { id: usize },

    #[error("evaluation window [{start}, {end}] s contains no observations")]
    EmptyWindow { start: f64, end: f64 },

    #[error("run has no perturbation configured")]
    NoPerturbation,

    #[error("cannot bracket the equilibrium gap at speed {speed} m/s")]
    Bracket { speed: f64 },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
