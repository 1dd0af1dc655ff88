//! Closed-loop applications on top of the simulated device: the zone
//! sensitivity experiment, the flight game and the teleoperation harness,
//! plus session logging and replay.

pub mod experiment;
pub mod flight;
pub mod session;
pub mod teleop;

mod stats;

use thiserror::Error;

use crate::device::DeviceError;
use crate::sim::SimError;
use crate::stim::StimError;
use crate::tactile::{FingerZone, TactileError};

pub use stats::BoxStats;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("zone {0} is missing from the zone map")]
    ZoneMissing(FingerZone),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stim(#[from] StimError),
    #[error(transparent)]
    Tactile(#[from] TactileError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
