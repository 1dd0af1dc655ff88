use serde::{Deserialize, Serialize};

use super::SimError;

/// Static draw while idle or active, mA.
pub const STATIC_DRAW_MA: f64 = 130.0;
/// Inrush draw during start-up, mA.
pub const STARTUP_DRAW_MA: f64 = 250.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    Idle,
    Startup,
    Active,
}

impl PowerMode {
    pub fn draw_ma(self) -> f64 {
        match self {
            PowerMode::Startup => STARTUP_DRAW_MA,
            PowerMode::Idle | PowerMode::Active => STATIC_DRAW_MA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerState {
    pub mode: PowerMode,
    pub draw_ma: f64,
    /// Time spent in the current mode.
    pub elapsed_ms: f64,
    pub boot_ms: f64,
}

impl PowerState {
    pub fn idle(boot_ms: f64) -> Self {
        Self::in_mode(PowerMode::Idle, boot_ms)
    }

    pub fn startup(boot_ms: f64) -> Self {
        Self::in_mode(PowerMode::Startup, boot_ms)
    }

    fn in_mode(mode: PowerMode, boot_ms: f64) -> Self {
        Self {
            mode,
            draw_ma: mode.draw_ma(),
            elapsed_ms: 0.0,
            boot_ms,
        }
    }
}

pub fn step_power(state: &PowerState, dt_ms: f64) -> Result<PowerState, SimError> {
    if !(dt_ms > 0.0) {
        return Err(SimError::BadTimeStep(dt_ms));
    }
    let elapsed = state.elapsed_ms + dt_ms;
    let next = match state.mode {
        PowerMode::Startup if elapsed >= state.boot_ms => PowerState {
            mode: PowerMode::Active,
            draw_ma: PowerMode::Active.draw_ma(),
            elapsed_ms: elapsed - state.boot_ms,
            boot_ms: state.boot_ms,
        },
        mode => PowerState {
            mode,
            draw_ma: mode.draw_ma(),
            elapsed_ms: elapsed,
            boot_ms: state.boot_ms,
        },
    };
    Ok(next)
}
