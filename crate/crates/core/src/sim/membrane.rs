use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::grid::Grid;
use crate::rng::rng_from;
use crate::tactile::{CalibrationCurve, TactileFrame};

/// Optical and mechanical parameters of the gel membrane.
///
/// The physical film is quoted as reaching a lower limit of about 30 mm at
/// roughly 300% deformation. That figure does not map onto a fingertip-sized
/// sensor, so `depth_cap_mm` is an independent parameter and only the strain
/// ratio is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MembraneModel {
    pub depth_cap_mm: f64,
    pub strain_limit: f64,
    /// Luminance lost per mm of indentation.
    pub indentation_gain: f64,
    /// Luminance gained per mm of positive scale-normalised depth Laplacian
    /// (sigma^2 * Laplacian, summed over presses), producing the bright rim
    /// around a press.
    pub ring_gain: f64,
    pub noise_sigma: f64,
}

impl Default for MembraneModel {
    fn default() -> Self {
        Self {
            depth_cap_mm: 3.0,
            strain_limit: 3.0,
            indentation_gain: 0.2,
            ring_gain: 1.0,
            noise_sigma: 0.004,
        }
    }
}

impl MembraneModel {
    pub fn noiseless(&self) -> Self {
        Self {
            noise_sigma: 0.0,
            ..self.clone()
        }
    }
}

/// A fingertip press: radially Gaussian indentation with standard deviation `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressEvent {
    pub center: (f64, f64),
    pub radius: f64,
    pub peak_depth: f64,
    /// Drift of the centre in pixels per frame.
    #[serde(default)]
    pub velocity: (f64, f64),
}

impl PressEvent {
    pub fn new(center: (f64, f64), radius: f64, peak_depth: f64) -> Self {
        Self {
            center,
            radius,
            peak_depth,
            velocity: (0.0, 0.0),
        }
    }
}

/// Slightly vignetted no-contact image, brightest at the centre.
pub fn default_baseline(width: usize, height: usize) -> Grid<f64> {
    let (cx, cy) = ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0);
    let r2max = cx * cx + cy * cy;
    Grid::from_fn(width, height, |x, y| {
        let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        0.8 - 0.08 * r2 / r2max
    })
}

fn validate(presses: &[PressEvent], membrane: &MembraneModel, w: usize, h: usize) -> Result<(), SimError> {
    for (index, p) in presses.iter().enumerate() {
        let (x, y) = p.center;
        if !(x >= 0.0 && y >= 0.0 && x < w as f64 && y < h as f64) {
            return Err(SimError::PressOutOfBounds {
                index,
                x,
                y,
                width: w,
                height: h,
            });
        }
        if !(p.radius > 0.0) {
            return Err(SimError::BadRadius { index });
        }
        if !(p.peak_depth >= 0.0 && p.peak_depth <= membrane.depth_cap_mm) {
            return Err(SimError::PressTooDeep {
                index,
                depth: p.peak_depth,
                cap: membrane.depth_cap_mm,
            });
        }
    }
    Ok(())
}

/// Summed Gaussian indentations, capped at the membrane's depth limit (mm).
pub fn depth_field(
    presses: &[PressEvent],
    membrane: &MembraneModel,
    width: usize,
    height: usize,
) -> Result<Grid<f64>, SimError> {
    validate(presses, membrane, width, height)?;
    Ok(Grid::from_fn(width, height, |x, y| {
        let d: f64 = presses
            .iter()
            .map(|p| {
                let r2 = (x as f64 - p.center.0).powi(2) + (y as f64 - p.center.1).powi(2);
                p.peak_depth * (-r2 / (2.0 * p.radius * p.radius)).exp()
            })
            .sum();
        d.min(membrane.depth_cap_mm)
    }))
}

/// Positive part of the scale-normalised Laplacian of the indentation,
/// `sum_i d_i * exp(-q^2/2) * (q^2 - 2)` with `q = r / radius_i`. Scale-free, so
/// the rim sits near 1.5 radii for every press size.
fn ring_field(presses: &[PressEvent], width: usize, height: usize) -> Grid<f64> {
    Grid::from_fn(width, height, |x, y| {
        let s: f64 = presses
            .iter()
            .map(|p| {
                let q2 = ((x as f64 - p.center.0).powi(2) + (y as f64 - p.center.1).powi(2)) / (p.radius * p.radius);
                p.peak_depth * (-q2 / 2.0).exp() * (q2 - 2.0)
            })
            .sum();
        s.max(0.0)
    })
}

/// Forward model of the in-sensor camera: thinning under the press darkens
/// the image, the thickened rim brightens it.
pub fn render_frame(
    presses: &[PressEvent],
    membrane: &MembraneModel,
    baseline: &Grid<f64>,
    seed: u64,
) -> Result<TactileFrame, SimError> {
    let (w, h) = baseline.dims();
    let depth = depth_field(presses, membrane, w, h)?;
    let ring = ring_field(presses, w, h);
    let mut intensity = Grid::from_fn(w, h, |x, y| {
        baseline.get(x, y) - membrane.indentation_gain * depth.get(x, y) + membrane.ring_gain * ring.get(x, y)
    });
    if membrane.noise_sigma > 0.0 {
        let mut rng = rng_from(seed);
        let noise = Normal::new(0.0, membrane.noise_sigma).expect("finite sigma");
        for v in intensity.as_mut_slice() {
            *v += noise.sample(&mut rng);
        }
    }
    intensity.as_mut_slice().iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(TactileFrame::new(intensity, 0, 0)?)
}

/// Identifies the deficit -> depth curve by rendering presses of known depth
/// on a flat baseline and reading the deficit at the press centre.
pub fn identify_calibration(membrane: &MembraneModel, depths_mm: &[f64]) -> Result<CalibrationCurve, SimError> {
    let model = membrane.noiseless();
    let (w, h) = (32, 32);
    let baseline = Grid::filled(w, h, 0.8);
    let mut knots = vec![(0.0, 0.0)];
    let mut depths: Vec<f64> = depths_mm
        .iter()
        .copied()
        .filter(|&d| d > 0.0 && d <= model.depth_cap_mm)
        .collect();
    depths.sort_by(f64::total_cmp);
    depths.dedup();
    for d in depths {
        let press = PressEvent::new((16.0, 16.0), 4.0, d);
        let frame = render_frame(&[press], &model, &baseline, 0)?;
        let deficit = baseline.get(16, 16) - frame.intensity().get(16, 16);
        knots.push((deficit, d));
    }
    Ok(CalibrationCurve::new(knots)?)
}
