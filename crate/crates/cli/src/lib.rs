//! Driver behind the `qb` binary: configuration, experiment dispatch and
//! output files.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;

use thiserror::Error;

pub use config::{parse_config, ConfigError, Experiment, RunConfig};
pub use run::{run, RunSummary};

/// Name of the environment variable holding the worker count.
pub const WORKERS_ENV: &str = "QB_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Simulation(#[from] qbattery::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// invariant violations, 4 for resource guards, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use qbattery::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(e) => match e {
                E::ResourceGuard(_) => 4,
                E::InvalidArgument(_)
                | E::InvalidGrid(_)
                | E::NegativeTime(_)
                | E::Truncation { .. }
                | E::DegenerateState(_)
                | E::IncompatibleCharger { .. } => 2,
                E::Invariant { .. }
                | E::SectorLeak { .. }
                | E::Eigensolve { .. }
                | E::InvalidDensityMatrix(_)
                | E::InvalidState(_)
                | E::DimensionMismatch { .. }
                | E::OutOfBounds(_)
                | E::InvalidLayout(_) => 3,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

/// Reads the worker count from [`WORKERS_ENV`]. Unset means rayon's default.
pub fn workers_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError {
                line: None,
                message: format!("{WORKERS_ENV} must be a positive integer, got `{v}`"),
            }),
        },
    }
}
