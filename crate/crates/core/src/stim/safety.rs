use serde::{Deserialize, Serialize};

use super::{Polarity, StimParams, DEFAULT_FREQUENCY_HZ, MAX_AMPLITUDE_MA, MAX_FREQUENCY_HZ, MIN_FREQUENCY_HZ};

/// Safety envelope enforced on every command, simulated or not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyLimits {
    pub max_amplitude_ma: f64,
    pub max_duration_ms: u32,
    /// Above this amplitude only charge-balanced (alternating) pulses are allowed.
    pub balance_above_ma: f64,
}

impl Default for SafetyLimits {
    fn default() -> Self {
        Self {
            max_amplitude_ma: MAX_AMPLITUDE_MA,
            max_duration_ms: 10_000,
            balance_above_ma: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampedField {
    Amplitude,
    Frequency,
    Duration,
    Polarity,
    PulseWidth,
}

/// Which fields `clamp_safety` had to change.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClampReport {
    pub clamped: Vec<ClampedField>,
}

impl ClampReport {
    pub fn is_clean(&self) -> bool {
        self.clamped.is_empty()
    }

    pub fn contains(&self, field: ClampedField) -> bool {
        self.clamped.contains(&field)
    }
}

pub fn clamp_safety(params: &StimParams, limits: &SafetyLimits) -> (StimParams, ClampReport) {
    let mut p = params.clone();
    let mut report = ClampReport::default();
    let mut mark = |f| report.clamped.push(f);

    let freq = if p.frequency_hz.is_nan() {
        DEFAULT_FREQUENCY_HZ
    } else {
        p.frequency_hz.clamp(MIN_FREQUENCY_HZ, MAX_FREQUENCY_HZ)
    };
    if freq != p.frequency_hz {
        p.frequency_hz = freq;
        mark(ClampedField::Frequency);
    }

    let max_amp = limits.max_amplitude_ma.clamp(0.0, MAX_AMPLITUDE_MA);
    let amp = if p.amplitude_ma.is_nan() {
        0.0
    } else {
        p.amplitude_ma.clamp(0.0, max_amp)
    };
    if amp != p.amplitude_ma {
        p.amplitude_ma = amp;
        mark(ClampedField::Amplitude);
    }

    if p.amplitude_ma > limits.balance_above_ma && p.polarity != Polarity::Alternating {
        p.polarity = Polarity::Alternating;
        mark(ClampedField::Polarity);
    }

    if p.duration_ms > limits.max_duration_ms {
        p.duration_ms = limits.max_duration_ms;
        mark(ClampedField::Duration);
    }

    let phases = if p.polarity == Polarity::Alternating { 2.0 } else { 1.0 };
    let max_width = ((p.period_us() / phases).floor() as u32).max(1);
    let width = p.pulse_width_us.clamp(1, max_width);
    if width != p.pulse_width_us {
        p.pulse_width_us = width;
        mark(ClampedField::PulseWidth);
    }
    (p, report)
}
