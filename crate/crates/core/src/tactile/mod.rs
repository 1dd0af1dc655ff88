//! Perception pipeline: tactile frames in, contact geometry, depth, motion,
//! force and finger-zone labels out.
//!
//! Everything here is a pure function of its inputs. Callers feed frame
//! streams in `seq` order.

mod contact;
mod depth;
pub mod fixture;
mod flow;
mod force;
mod reference;
mod zones;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;

pub use contact::ContactPatch;
pub use depth::{CalibrationCurve, DepthMap};
pub use flow::{translate_grid, BlockFlow, FlowField};
pub use force::ForceEstimate;
pub use reference::ReferenceModel;
pub use zones::{FingerZone, ZoneMap};

pub const MIN_FRAME_SIDE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TactileError {
    #[error("frame {width}x{height} is smaller than {MIN_FRAME_SIDE}x{MIN_FRAME_SIDE}")]
    FrameTooSmall { width: usize, height: usize },
    #[error("intensity {value} at ({x},{y}) outside [0,1]")]
    IntensityOutOfRange { x: usize, y: usize, value: f64 },
    #[error("no reference frames supplied")]
    EmptyReference,
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("reference model has no calibration curve")]
    CalibrationMissing,
    #[error("invalid calibration curve: {0}")]
    InvalidCalibration(String),
    #[error("centroid ({x:.2},{y:.2}) outside the active sensing area")]
    OutsideActiveArea { x: f64, y: f64 },
    #[error("zone map: {0}")]
    ZoneMap(String),
    #[error("frame fixture: {0}")]
    Fixture(String),
}

/// One grayscale image from the in-sensor camera. Luminance lives in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TactileFrame {
    intensity: Grid<f64>,
    pub timestamp_us: u64,
    pub seq: u32,
}

impl TactileFrame {
    pub fn new(intensity: Grid<f64>, seq: u32, timestamp_us: u64) -> Result<Self, TactileError> {
        let (width, height) = intensity.dims();
        if width < MIN_FRAME_SIDE || height < MIN_FRAME_SIDE {
            return Err(TactileError::FrameTooSmall { width, height });
        }
        if let Some((x, y, &value)) = intensity.indexed().find(|(_, _, v)| !(0.0..=1.0).contains(*v)) {
            return Err(TactileError::IntensityOutOfRange { x, y, value });
        }
        Ok(Self {
            intensity,
            timestamp_us,
            seq,
        })
    }

    pub fn width(&self) -> usize {
        self.intensity.width()
    }

    pub fn height(&self) -> usize {
        self.intensity.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.intensity.dims()
    }

    pub fn intensity(&self) -> &Grid<f64> {
        &self.intensity
    }

    pub fn with_meta(mut self, seq: u32, timestamp_us: u64) -> Self {
        self.seq = seq;
        self.timestamp_us = timestamp_us;
        self
    }
}

/// Tunables for the perception pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerceptionConfig {
    /// Contact threshold in multiples of the reference noise sigma.
    pub k_sigma: f64,
    /// Absolute luminance floor added to the sigma threshold.
    pub abs_threshold: f64,
    pub min_contact_area: usize,
    pub block_size: usize,
    pub search_radius: usize,
    /// Minimum contact pixels inside a block before it is tracked.
    pub min_block_support: usize,
    pub normal_gain: f64,
    pub shear_gain: f64,
    /// Intensity deficit -> depth (mm) knots, starting at (0, 0).
    pub calib_knots: Vec<(f64, f64)>,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            k_sigma: 4.0,
            abs_threshold: 0.02,
            min_contact_area: 9,
            block_size: 8,
            search_radius: 6,
            min_block_support: 8,
            normal_gain: 1.0,
            shear_gain: 0.1,
            // Matches the default membrane: 0.2 luminance per mm, capped at 3 mm.
            calib_knots: vec![(0.0, 0.0), (0.6, 3.0)],
        }
    }
}

/// The perception pipeline bound to one configuration.
#[derive(Debug, Clone, Default)]
pub struct Perception {
    pub config: PerceptionConfig,
}

impl Perception {
    pub fn new(config: PerceptionConfig) -> Self {
        Self { config }
    }

    pub fn set_reference(&self, frames: &[TactileFrame]) -> Result<ReferenceModel, TactileError> {
        reference::set_reference(frames, &self.config)
    }

    pub fn detect_contact(
        &self,
        frame: &TactileFrame,
        reference: &ReferenceModel,
    ) -> Result<Option<ContactPatch>, TactileError> {
        contact::detect_contact(frame, reference, &self.config)
    }

    /// Raw contact mask before the area test; `None` only on error.
    pub fn contact_mask(&self, frame: &TactileFrame, reference: &ReferenceModel) -> Result<Grid<bool>, TactileError> {
        contact::contact_mask(frame, reference, &self.config)
    }

    pub fn reconstruct_depth(
        &self,
        frame: &TactileFrame,
        reference: &ReferenceModel,
    ) -> Result<DepthMap, TactileError> {
        depth::reconstruct_depth(frame, reference)
    }

    pub fn estimate_flow(
        &self,
        prev: &TactileFrame,
        curr: &TactileFrame,
        reference: &ReferenceModel,
    ) -> Result<FlowField, TactileError> {
        flow::estimate_flow(prev, curr, reference, &self.config)
    }

    pub fn estimate_force(&self, depth: &DepthMap, flow: &FlowField) -> ForceEstimate {
        force::estimate_force(depth, flow, &self.config)
    }

    pub fn classify_zone(&self, patch: &ContactPatch, zones: &ZoneMap) -> Result<FingerZone, TactileError> {
        zones.classify(patch)
    }
}

pub(crate) fn check_dims(expected: (usize, usize), found: (usize, usize)) -> Result<(), TactileError> {
    if expected != found {
        return Err(TactileError::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_small_or_out_of_range() {
        let small = Grid::filled(8, 32, 0.5);
        assert!(matches!(
            TactileFrame::new(small, 0, 0),
            Err(TactileError::FrameTooSmall { .. })
        ));
        let mut bad = Grid::filled(16, 16, 0.5);
        bad.set(3, 4, 1.2);
        assert!(matches!(
            TactileFrame::new(bad, 0, 0),
            Err(TactileError::IntensityOutOfRange { x: 3, y: 4, .. })
        ));
    }
}
