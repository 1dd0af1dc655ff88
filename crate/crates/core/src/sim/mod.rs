//! Simulated VET hardware: gel-membrane renderer, skin load, perceived
//! sensation and power draw.
//!
//! Tick-driven and deterministic: every operation takes explicit state and
//! a seed and returns new state.

mod load;
mod membrane;
mod percept;
mod power;
mod scenario;

use thiserror::Error;

use crate::tactile::TactileError;

pub use load::{step_load, SkinLoad};
pub use membrane::{default_baseline, depth_field, identify_calibration, render_frame, MembraneModel, PressEvent};
pub use percept::{perceive, PerceivedLocation, PerceptEstimate, SensitivityTable};
pub use power::{step_power, PowerMode, PowerState, STARTUP_DRAW_MA, STATIC_DRAW_MA};
pub use scenario::{Scenario, TimedPress};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("press {index} centre ({x:.1},{y:.1}) outside the {width}x{height} frame")]
    PressOutOfBounds {
        index: usize,
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("press {index}: peak depth {depth} mm exceeds the {cap} mm cap")]
    PressTooDeep { index: usize, depth: f64, cap: f64 },
    #[error("press {index}: radius must be positive")]
    BadRadius { index: usize },
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Tactile(#[from] TactileError),
}
