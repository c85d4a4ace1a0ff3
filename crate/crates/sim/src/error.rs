use std::io;
use std::path::{Path, PathBuf};

/// Everything the front end can fail with, mapped onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Usage(String),

    #[error("collision at t = {time} s: vehicle {vehicle} has gap {gap} m")]
    Collision { time: f64, vehicle: usize, gap: f64 },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl SimError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Prefixes parse and validation messages with the offending file.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            SimError::Parse(m) => SimError::Parse(format!("{}: {m}", path.display())),
            SimError::Validation(m) => SimError::Validation(format!("{}: {m}", path.display())),
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Parse(_) | SimError::Validation(_) | SimError::Usage(_) => 2,
            SimError::Collision { .. } => 3,
            SimError::Io { .. } => 4,
        }
    }
}

impl From<iadm_core::Error> for SimError {
    fn from(e: iadm_core::Error) -> Self {
        match e {
            iadm_core::Error::Collision { time, vehicle, gap } => SimError::Collision { time, vehicle, gap },
            other => SimError::Validation(other.to_string()),
        }
    }
}
