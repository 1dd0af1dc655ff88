use serde::{Deserialize, Serialize};

use super::{
    check_dims, depth, force, DepthMap, FlowField, ForceEstimate, PerceptionConfig, ReferenceModel, TactileError,
    TactileFrame,
};
use crate::grid::Grid;

/// A detected contact region. A single patch covers every contact component in the frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactPatch {
    pub mask: Grid<bool>,
    pub centroid: (f64, f64),
    pub area: usize,
    pub depth: DepthMap,
    pub force: ForceEstimate,
}

impl ContactPatch {
    /// Inclusive bounding box `(x0, y0, x1, y1)` of the mask.
    pub fn bounding_box(&self) -> (usize, usize, usize, usize) {
        let mut bb = (usize::MAX, usize::MAX, 0, 0);
        for (x, y, &m) in self.mask.indexed() {
            if m {
                bb.0 = bb.0.min(x);
                bb.1 = bb.1.min(y);
                bb.2 = bb.2.max(x);
                bb.3 = bb.3.max(y);
            }
        }
        bb
    }
}

pub(super) fn contact_mask(
    frame: &TactileFrame,
    reference: &ReferenceModel,
    config: &PerceptionConfig,
) -> Result<Grid<bool>, TactileError> {
    check_dims(reference.dims(), frame.dims())?;
    let threshold = config.k_sigma * reference.noise_sigma + config.abs_threshold;
    let raw = reference
        .baseline
        .zip_map(frame.intensity(), |&b, &i| (i - b).abs() > threshold);
    Ok(remove_small_components(&raw, config.min_contact_area))
}

pub(super) fn detect_contact(
    frame: &TactileFrame,
    reference: &ReferenceModel,
    config: &PerceptionConfig,
) -> Result<Option<ContactPatch>, TactileError> {
    let mask = contact_mask(frame, reference, config)?;
    let area = mask.count_true();
    if area < config.min_contact_area.max(1) {
        return Ok(None);
    }
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y, &m) in mask.indexed() {
        if m {
            sx += x as f64;
            sy += y as f64;
        }
    }
    let centroid = (sx / area as f64, sy / area as f64);
    let depth = depth::reconstruct_depth(frame, reference)?.masked(&mask);
    let (w, h) = frame.dims();
    let force = force::estimate_force(&depth, &FlowField::empty(config.block_size, w, h), config);
    Ok(Some(ContactPatch {
        mask,
        centroid,
        area,
        depth,
        force,
    }))
}

/// Drops 8-connected components smaller than `min_size` (speckle removal).
fn remove_small_components(mask: &Grid<bool>, min_size: usize) -> Grid<bool> {
    let (w, h) = mask.dims();
    let mut label = Grid::filled(w, h, false);
    let mut out = Grid::filled(w, h, false);
    let mut stack = Vec::new();
    let mut component = Vec::new();
    for (sx, sy, &m) in mask.indexed() {
        if !m || *label.get(sx, sy) {
            continue;
        }
        component.clear();
        stack.push((sx, sy));
        label.set(sx, sy, true);
        while let Some((x, y)) = stack.pop() {
            component.push((x, y));
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if !mask.contains(nx, ny) {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if *mask.get(nx, ny) && !*label.get(nx, ny) {
                        label.set(nx, ny, true);
                        stack.push((nx, ny));
                    }
                }
            }
        }
        if component.len() >= min_size {
            for &(x, y) in &component {
                out.set(x, y, true);
            }
        }
    }
    out
}
