//! Dual-channel stimulation controller: waveform synthesis, current
//! regulation, the electrode switch array, grounding placement and the
//! safety envelope.
//!
//! The engine is single-owner: one command stream drives it. Telemetry is
//! handed out as immutable snapshots.

mod grounding;
mod regulator;
mod safety;
mod switch;
mod waveform;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grounding::{grounding_info, GroundingConfig, GroundingInfo, GroundingPlacement};
pub use regulator::{Regulator, RegulatorConfig, RegulatorState};
pub use safety::{clamp_safety, ClampReport, ClampedField, SafetyLimits};
pub use switch::{set_electrodes, ElectrodeLayout, PixelRect, SwitchArray, SwitchState};
pub use waveform::{synth_sample, WaveformSample};

/// Receptor band targeted by the stimulator, in Hz.
pub const MIN_FREQUENCY_HZ: f64 = 0.5;
pub const MAX_FREQUENCY_HZ: f64 = 100.0;
pub const DEFAULT_FREQUENCY_HZ: f64 = 50.0;
pub const DEFAULT_PULSE_WIDTH_US: u32 = 200;
/// Hard ceiling on commanded current.
pub const MAX_AMPLITUDE_MA: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StimError {
    #[error("frequency {0} Hz outside [{MIN_FREQUENCY_HZ}, {MAX_FREQUENCY_HZ}]")]
    FrequencyOutOfBand(f64),
    #[error("amplitude {amplitude} mA outside [0, {max}]")]
    AmplitudeOutOfRange { amplitude: f64, max: f64 },
    #[error("pulse width {pulse_width_us} us does not fit period {period_us:.1} us")]
    PulseWidthTooLong { pulse_width_us: u32, period_us: f64 },
    #[error("pulse width must be positive")]
    ZeroPulseWidth,
    #[error("no electrodes selected for a non-zero duration")]
    NoElectrodes,
    #[error("t = {t_us} us is beyond the command duration of {duration_ms} ms")]
    BeyondDuration { t_us: u64, duration_ms: u32 },
    #[error("measured current is not finite")]
    NonFiniteMeasurement,
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("invalid grounding: {0}")]
    Grounding(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Ac1,
    Ac2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
    Alternating,
}

/// One stimulation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimParams {
    pub channel: Channel,
    pub frequency_hz: f64,
    /// Regulation setpoint.
    pub amplitude_ma: f64,
    pub polarity: Polarity,
    pub pulse_width_us: u32,
    pub duration_ms: u32,
    pub electrodes: BTreeSet<u16>,
}

impl StimParams {
    /// Defaults from `config`: 50 Hz alternating pulses on AC1.
    pub fn new(config: &StimConfig, amplitude_ma: f64, electrodes: BTreeSet<u16>) -> Self {
        Self {
            channel: Channel::Ac1,
            frequency_hz: config.default_frequency_hz,
            amplitude_ma,
            polarity: Polarity::Alternating,
            pulse_width_us: config.pulse_width_us,
            duration_ms: 1000,
            electrodes,
        }
    }

    pub fn period_us(&self) -> f64 {
        1e6 / self.frequency_hz
    }

    pub fn validate(&self) -> Result<(), StimError> {
        if !(MIN_FREQUENCY_HZ..=MAX_FREQUENCY_HZ).contains(&self.frequency_hz) {
            return Err(StimError::FrequencyOutOfBand(self.frequency_hz));
        }
        if !(0.0..=MAX_AMPLITUDE_MA).contains(&self.amplitude_ma) {
            return Err(StimError::AmplitudeOutOfRange {
                amplitude: self.amplitude_ma,
                max: MAX_AMPLITUDE_MA,
            });
        }
        if self.pulse_width_us == 0 {
            return Err(StimError::ZeroPulseWidth);
        }
        let period_us = self.period_us();
        let phases = if self.polarity == Polarity::Alternating {
            2.0
        } else {
            1.0
        };
        if self.pulse_width_us as f64 * phases > period_us {
            return Err(StimError::PulseWidthTooLong {
                pulse_width_us: self.pulse_width_us,
                period_us,
            });
        }
        if self.duration_ms > 0 && self.electrodes.is_empty() {
            return Err(StimError::NoElectrodes);
        }
        Ok(())
    }
}

/// `stim.*` configuration keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StimConfig {
    pub max_amplitude_ma: f64,
    pub default_frequency_hz: f64,
    pub pulse_width_us: u32,
    pub grounding: GroundingPlacement,
    pub regulator: RegulatorConfig,
}

impl Default for StimConfig {
    fn default() -> Self {
        Self {
            max_amplitude_ma: MAX_AMPLITUDE_MA,
            default_frequency_hz: DEFAULT_FREQUENCY_HZ,
            pulse_width_us: DEFAULT_PULSE_WIDTH_US,
            grounding: GroundingPlacement::Back,
            regulator: RegulatorConfig::default(),
        }
    }
}

impl StimConfig {
    pub fn safety_limits(&self) -> SafetyLimits {
        SafetyLimits {
            max_amplitude_ma: self.max_amplitude_ma.clamp(0.0, MAX_AMPLITUDE_MA),
            ..SafetyLimits::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> StimParams {
        StimParams::new(&StimConfig::default(), 1.0, BTreeSet::from([3]))
    }

    #[test]
    fn defaults() {
        let cfg = StimConfig::default();
        assert_eq!(cfg.default_frequency_hz, 50.0);
        assert_eq!(cfg.grounding, GroundingPlacement::Back);
        assert_eq!(params().period_us(), 20_000.0);
        params().validate().unwrap();
    }

    #[test]
    fn validation() {
        let mut p = params();
        p.frequency_hz = 120.0;
        assert!(matches!(p.validate(), Err(StimError::FrequencyOutOfBand(_))));
        let mut p = params();
        p.pulse_width_us = 10_001;
        assert!(matches!(p.validate(), Err(StimError::PulseWidthTooLong { .. })));
        let mut p = params();
        p.electrodes.clear();
        assert_eq!(p.validate(), Err(StimError::NoElectrodes));
        p.duration_ms = 0;
        p.validate().unwrap();
    }

    #[test]
    fn json_field_names() {
        let v = serde_json::to_value(params()).unwrap();
        for k in [
            "channel",
            "frequency_hz",
            "amplitude_ma",
            "polarity",
            "pulse_width_us",
            "duration_ms",
            "electrodes",
        ] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["channel"], "ac1");
        assert_eq!(v["polarity"], "alternating");
    }
}
