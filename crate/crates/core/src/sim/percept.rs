use serde::{Deserialize, Serialize};

use crate::stim::{Polarity, StimParams, SwitchArray, MAX_AMPLITUDE_MA, MAX_FREQUENCY_HZ, MIN_FREQUENCY_HZ};
use crate::tactile::FingerZone;

/// Where on the fingertip a back-grounded stimulus is felt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerceivedLocation {
    UpperFingertip,
    LowerFingertip,
    ContactPoint,
}

impl PerceivedLocation {
    pub fn from_polarity(p: Polarity) -> Self {
        match p {
            Polarity::Positive => PerceivedLocation::UpperFingertip,
            Polarity::Negative => PerceivedLocation::LowerFingertip,
            Polarity::Alternating => PerceivedLocation::ContactPoint,
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        [
            PerceivedLocation::UpperFingertip,
            PerceivedLocation::LowerFingertip,
            PerceivedLocation::ContactPoint,
        ]
        .get(i as usize)
        .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptEstimate {
    pub location: PerceivedLocation,
    pub intensity_score: f64,
    pub zone: FingerZone,
}

/// Relative sensitivity per finger zone. The defaults encode an ordering
/// (fingertip, then ventral, bottom, and the two flanks), not measured data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivityTable {
    pub fingertip: f64,
    pub ventral: f64,
    pub bottom: f64,
    pub left: f64,
    pub right: f64,
}

impl Default for SensitivityTable {
    fn default() -> Self {
        Self {
            fingertip: 1.0,
            ventral: 0.85,
            bottom: 0.7,
            left: 0.55,
            right: 0.55,
        }
    }
}

impl SensitivityTable {
    pub fn score(&self, zone: FingerZone) -> f64 {
        match zone {
            FingerZone::Fingertip => self.fingertip,
            FingerZone::Ventral => self.ventral,
            FingerZone::Bottom => self.bottom,
            FingerZone::Left => self.left,
            FingerZone::Right => self.right,
        }
    }
}

/// Drive-strength factor in [0, 1]: linear in amplitude, mildly increasing
/// with log-frequency across the receptor band.
fn drive_factor(amplitude_ma: f64, frequency_hz: f64) -> f64 {
    let a = (amplitude_ma / MAX_AMPLITUDE_MA).clamp(0.0, 1.0);
    let f = frequency_hz.clamp(MIN_FREQUENCY_HZ, MAX_FREQUENCY_HZ);
    let band = (f / MIN_FREQUENCY_HZ).ln() / (MAX_FREQUENCY_HZ / MIN_FREQUENCY_HZ).ln();
    a * (0.6 + 0.4 * band)
}

/// Synthetic participant: where and how strongly a stimulus is felt.
pub fn perceive(
    array: &SwitchArray,
    params: &StimParams,
    zone: FingerZone,
    table: &SensitivityTable,
) -> PerceptEstimate {
    let intensity_score = if array.any_stim() && params.amplitude_ma > 0.0 {
        (table.score(zone) * drive_factor(params.amplitude_ma, params.frequency_hz)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    PerceptEstimate {
        location: PerceivedLocation::from_polarity(params.polarity),
        intensity_score,
        zone,
    }
}
