use serde::{Deserialize, Serialize};

use super::{check_dims, contact, PerceptionConfig, ReferenceModel, TactileError, TactileFrame};
use crate::grid::Grid;

/// Displacement of one tracked block between two frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockFlow {
    pub bx: usize,
    pub by: usize,
    pub dx: f64,
    pub dy: f64,
    pub confidence: f64,
}

/// Block-resolution motion field. Only blocks carrying contact are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowField {
    pub block_size: usize,
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub vectors: Vec<BlockFlow>,
    pub mean_flow: (f64, f64),
    pub confidence: f64,
}

impl FlowField {
    pub fn empty(block_size: usize, width: usize, height: usize) -> Self {
        let bs = block_size.max(1);
        Self {
            block_size: bs,
            blocks_x: width / bs,
            blocks_y: height / bs,
            vectors: Vec::new(),
            mean_flow: (0.0, 0.0),
            confidence: 0.0,
        }
    }

    /// A field carrying only a mean flow, as used when replaying logged inputs.
    pub fn from_mean(mean_flow: (f64, f64), confidence: f64) -> Self {
        Self {
            block_size: 0,
            blocks_x: 0,
            blocks_y: 0,
            vectors: Vec::new(),
            mean_flow,
            confidence,
        }
    }
}

pub(super) fn estimate_flow(
    prev: &TactileFrame,
    curr: &TactileFrame,
    reference: &ReferenceModel,
    config: &PerceptionConfig,
) -> Result<FlowField, TactileError> {
    check_dims(prev.dims(), curr.dims())?;
    check_dims(reference.dims(), prev.dims())?;
    let (w, h) = prev.dims();
    let bs = config.block_size.max(1);
    let radius = config.search_radius as i64;
    let mut field = FlowField::empty(bs, w, h);

    let prev_mask = contact::contact_mask(prev, reference, config)?;
    let curr_mask = contact::contact_mask(curr, reference, config)?;
    if prev_mask.count_true() < config.min_contact_area.max(1)
        || curr_mask.count_true() < config.min_contact_area.max(1)
    {
        return Ok(field);
    }

    // Match on the intensity deficit so a non-uniform baseline does not bias the search.
    let deficit = |f: &TactileFrame| reference.baseline.zip_map(f.intensity(), |&b, &i| b - i);
    let sp = deficit(prev);
    let sc = deficit(curr);

    let side = (2 * radius + 1) as usize;
    let mut ssd = vec![0.0f64; side * side];
    let (mut wsum, mut fx, mut fy) = (0.0, 0.0, 0.0);
    for by in 0..field.blocks_y {
        for bx in 0..field.blocks_x {
            let (x0, y0) = ((bx * bs) as i64, (by * bs) as i64);
            // Whole search window must stay inside the frame.
            if x0 - radius < 0
                || y0 - radius < 0
                || x0 + bs as i64 + radius > w as i64
                || y0 + bs as i64 + radius > h as i64
            {
                continue;
            }
            let support = (0..bs)
                .flat_map(|j| (0..bs).map(move |i| (i, j)))
                .filter(|&(i, j)| *prev_mask.get(x0 as usize + i, y0 as usize + j))
                .count();
            if support < config.min_block_support {
                continue;
            }
            let energy: f64 = (0..bs)
                .flat_map(|j| (0..bs).map(move |i| (i, j)))
                .map(|(i, j)| sp.get(x0 as usize + i, y0 as usize + j).powi(2))
                .sum();

            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    let mut s = 0.0;
                    for j in 0..bs {
                        let (py, cy) = (y0 as usize + j, (y0 + dy) as usize + j);
                        for i in 0..bs {
                            let d = sp.get(x0 as usize + i, py) - sc.get((x0 + dx) as usize + i, cy);
                            s += d * d;
                        }
                    }
                    ssd[((dy + radius) as usize) * side + (dx + radius) as usize] = s;
                }
            }
            let at = |dx: i64, dy: i64| ssd[((dy + radius) as usize) * side + (dx + radius) as usize];
            let (mut best, mut bdx, mut bdy) = (f64::INFINITY, 0i64, 0i64);
            for dy in -radius..=radius {
                for dx in -radius..=radius {
                    let s = at(dx, dy);
                    // Ties resolve toward the smaller displacement.
                    if s < best || (s == best && dx * dx + dy * dy < bdx * bdx + bdy * bdy) {
                        (best, bdx, bdy) = (s, dx, dy);
                    }
                }
            }
            let mut neighbour = f64::INFINITY;
            for ny in -1..=1 {
                for nx in -1..=1 {
                    let (cx, cy) = (bdx + nx, bdy + ny);
                    if (nx, ny) != (0, 0) && cx.abs() <= radius && cy.abs() <= radius {
                        neighbour = neighbour.min(at(cx, cy));
                    }
                }
            }
            let confidence = if neighbour.is_finite() {
                ((neighbour - best) / (neighbour + best + 1e-3 * energy + 1e-12)).clamp(0.0, 1.0)
            } else {
                0.0
            };

            let refine = |lo: f64, mid: f64, hi: f64| {
                let denom = lo - 2.0 * mid + hi;
                if denom > 0.0 {
                    (0.5 * (lo - hi) / denom).clamp(-0.5, 0.5)
                } else {
                    0.0
                }
            };
            let mut vx = bdx as f64;
            let mut vy = bdy as f64;
            // An exact match is already integral.
            if best > 0.0 && bdx.abs() < radius {
                vx += refine(at(bdx - 1, bdy), best, at(bdx + 1, bdy));
            }
            if best > 0.0 && bdy.abs() < radius {
                vy += refine(at(bdx, bdy - 1), best, at(bdx, bdy + 1));
            }
            let r = radius as f64;
            let (vx, vy) = (vx.clamp(-r, r), vy.clamp(-r, r));
            field.vectors.push(BlockFlow {
                bx,
                by,
                dx: vx,
                dy: vy,
                confidence,
            });
            wsum += confidence;
            fx += confidence * vx;
            fy += confidence * vy;
        }
    }
    if !field.vectors.is_empty() && wsum > 0.0 {
        field.mean_flow = (fx / wsum, fy / wsum);
        field.confidence = wsum / field.vectors.len() as f64;
    }
    Ok(field)
}

/// Shifts a grid by an integer offset, filling uncovered pixels with `fill`.
pub fn translate_grid(g: &Grid<f64>, dx: i64, dy: i64, fill: impl Fn(usize, usize) -> f64) -> Grid<f64> {
    Grid::from_fn(g.width(), g.height(), |x, y| {
        let (sx, sy) = (x as i64 - dx, y as i64 - dy);
        if g.contains(sx, sy) {
            *g.get(sx as usize, sy as usize)
        } else {
            fill(x, y)
        }
    })
}
