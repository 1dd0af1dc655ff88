use serde::{Deserialize, Serialize};

use super::{default_baseline, render_frame, MembraneModel, PressEvent, SimError, SkinLoad};
use crate::rng::derive_seed;
use crate::tactile::TactileFrame;

/// A press active over `[start_us, end_us)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPress {
    pub start_us: u64,
    pub end_us: u64,
    pub press: PressEvent,
}

/// Scripted sensor input. Scenario plus seed fixes the frame stream bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub frame_interval_us: u64,
    pub seed: u64,
    pub membrane: MembraneModel,
    pub load: SkinLoad,
    pub presses: Vec<TimedPress>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            frames: 30,
            frame_interval_us: 33_333,
            seed: 0,
            membrane: MembraneModel::default(),
            load: SkinLoad::default(),
            presses: Vec::new(),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.width < crate::tactile::MIN_FRAME_SIDE || self.height < crate::tactile::MIN_FRAME_SIDE {
            return Err(SimError::Scenario(format!(
                "frame {}x{} is smaller than the sensor minimum",
                self.width, self.height
            )));
        }
        if self.frame_interval_us == 0 {
            return Err(SimError::Scenario("frame_interval_us must be positive".into()));
        }
        for (i, p) in self.presses.iter().enumerate() {
            if p.end_us <= p.start_us {
                return Err(SimError::Scenario(format!("press {i} has an empty time window")));
            }
        }
        super::depth_field(
            &self.presses.iter().map(|p| p.press).collect::<Vec<_>>(),
            &self.membrane,
            self.width,
            self.height,
        )?;
        Ok(())
    }

    pub fn baseline(&self) -> crate::grid::Grid<f64> {
        default_baseline(self.width, self.height)
    }

    /// Presses active at `t_us`, advanced by their velocity and kept on the sensor.
    pub fn presses_at(&self, t_us: u64) -> Vec<PressEvent> {
        let (w, h) = (self.width as f64, self.height as f64);
        self.presses
            .iter()
            .filter(|p| p.start_us <= t_us && t_us < p.end_us)
            .map(|p| {
                let n = ((t_us - p.start_us) / self.frame_interval_us) as f64;
                let mut press = p.press;
                press.center.0 = (press.center.0 + press.velocity.0 * n).clamp(0.0, w - 1.0);
                press.center.1 = (press.center.1 + press.velocity.1 * n).clamp(0.0, h - 1.0);
                press
            })
            .collect()
    }

    pub fn render(&self, index: usize) -> Result<TactileFrame, SimError> {
        let t_us = index as u64 * self.frame_interval_us;
        let frame = render_frame(
            &self.presses_at(t_us),
            &self.membrane,
            &self.baseline(),
            derive_seed(self.seed, index as u64),
        )?;
        Ok(frame.with_meta(index as u32, t_us))
    }

    pub fn render_stream(&self) -> Result<Vec<TactileFrame>, SimError> {
        self.validate()?;
        (0..self.frames).map(|i| self.render(i)).collect()
    }
}
