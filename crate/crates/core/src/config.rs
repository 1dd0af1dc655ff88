//! Top-level JSON configuration. Every section and key is optional; missing
//! values take their defaults. Unknown top-level sections are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apps::experiment::ExperimentConfig;
use crate::apps::flight::FlightConfig;
use crate::apps::teleop::TeleopConfig;
use crate::device::{DeviceConfig, PowerConfig, SensorConfig};
use crate::sim::{MembraneModel, SensitivityTable, SkinLoad};
use crate::stim::{GroundingConfig, StimConfig};
use crate::tactile::{CalibrationCurve, PerceptionConfig};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VetConfig {
    pub seed: u64,
    pub sensor: SensorConfig,
    pub perception: PerceptionConfig,
    pub stim: StimConfig,
    pub membrane: MembraneModel,
    pub load: SkinLoad,
    pub power: PowerConfig,
    pub sensitivity: SensitivityTable,
    pub experiment: ExperimentConfig,
    pub flight: FlightConfig,
    pub teleop: TeleopConfig,
}

impl Default for VetConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            sensor: SensorConfig::default(),
            perception: PerceptionConfig::default(),
            stim: StimConfig::default(),
            membrane: MembraneModel::default(),
            load: SkinLoad::default(),
            power: PowerConfig::default(),
            sensitivity: SensitivityTable::default(),
            experiment: ExperimentConfig::default(),
            flight: FlightConfig::default(),
            teleop: TeleopConfig::default(),
        }
    }
}

impl VetConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: VetConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Canonical serialization; also the input to the config hash.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn device(&self) -> DeviceConfig {
        DeviceConfig {
            sensor: self.sensor.clone(),
            membrane: self.membrane.clone(),
            perception: self.perception.clone(),
            stim: self.stim.clone(),
            load: self.load,
            power: self.power.clone(),
            sensitivity: self.sensitivity,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let s = &self.sensor;
        if s.width < crate::tactile::MIN_FRAME_SIDE || s.height < crate::tactile::MIN_FRAME_SIDE {
            return bad(format!("sensor must be at least 16x16, got {}x{}", s.width, s.height));
        }
        if s.frame_interval_us == 0 || s.electrode_cols == 0 || s.electrode_rows == 0 {
            return bad("sensor.frame_interval_us and electrode grid must be positive".into());
        }
        if !(self.membrane.depth_cap_mm > 0.0) || !(self.membrane.noise_sigma >= 0.0) {
            return bad("membrane.depth_cap_mm must be positive and noise_sigma non-negative".into());
        }
        if !(self.stim.max_amplitude_ma > 0.0 && self.stim.max_amplitude_ma <= crate::stim::MAX_AMPLITUDE_MA) {
            return bad(format!(
                "stim.max_amplitude_ma must be in (0, {}]",
                crate::stim::MAX_AMPLITUDE_MA
            ));
        }
        if !(crate::stim::MIN_FREQUENCY_HZ..=crate::stim::MAX_FREQUENCY_HZ).contains(&self.stim.default_frequency_hz) {
            return bad("stim.default_frequency_hz is outside the receptor band".into());
        }
        GroundingConfig::new(self.stim.grounding)
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        CalibrationCurve::new(self.perception.calib_knots.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let l = &self.load;
        if !(l.min_kohm > 0.0 && l.min_kohm <= l.resistance_kohm && l.resistance_kohm <= l.max_kohm) {
            return bad("load.resistance_kohm must lie within [min_kohm, max_kohm]".into());
        }
        if !(self.power.boot_ms >= 0.0) {
            return bad("power.boot_ms must be non-negative".into());
        }
        let apps = |e: crate::apps::AppError| ConfigError::Invalid(e.to_string());
        self.experiment.validate().map_err(apps)?;
        self.flight.validate().map_err(apps)?;
        self.teleop.validate().map_err(apps)?;
        Ok(())
    }
}
