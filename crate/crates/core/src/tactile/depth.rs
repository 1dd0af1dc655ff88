use serde::{Deserialize, Serialize};

use super::{check_dims, ReferenceModel, TactileError, TactileFrame};
use crate::grid::Grid;

/// Piecewise-linear map from intensity deficit (baseline minus observed) to
/// indentation depth in mm. Strictly increasing and anchored at (0, 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct CalibrationCurve {
    knots: Vec<(f64, f64)>,
}

impl CalibrationCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, TactileError> {
        if knots.len() < 2 {
            return Err(TactileError::InvalidCalibration("need at least two knots".into()));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(TactileError::InvalidCalibration("first knot must be (0, 0)".into()));
        }
        for pair in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
            if !(x1 > x0 && y1 > y0) || !x1.is_finite() || !y1.is_finite() {
                return Err(TactileError::InvalidCalibration(format!(
                    "knots not strictly increasing at ({x0}, {y0}) -> ({x1}, {y1})"
                )));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Deepest representable indentation; deficits past the last knot saturate here.
    pub fn max_depth(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }

    pub fn eval(&self, deficit: f64) -> f64 {
        if deficit <= 0.0 || deficit.is_nan() {
            return 0.0;
        }
        let i = self.knots.partition_point(|&(x, _)| x < deficit);
        if i >= self.knots.len() {
            return self.max_depth();
        }
        let (x1, y1) = self.knots[i];
        let (x0, y0) = self.knots[i - 1];
        y0 + (deficit - x0) * (y1 - y0) / (x1 - x0)
    }
}

impl TryFrom<Vec<(f64, f64)>> for CalibrationCurve {
    type Error = TactileError;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<CalibrationCurve> for Vec<(f64, f64)> {
    fn from(c: CalibrationCurve) -> Self {
        c.knots
    }
}

/// Indentation depth in mm, aligned with frame pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthMap {
    pub depth: Grid<f64>,
    pub max_depth: f64,
}

impl DepthMap {
    pub fn from_grid(depth: Grid<f64>) -> Self {
        let max_depth = depth.iter().copied().fold(0.0, f64::max);
        Self { depth, max_depth }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::from_grid(Grid::filled(width, height, 0.0))
    }

    /// Keeps depth only where `mask` is set.
    pub fn masked(&self, mask: &Grid<bool>) -> Self {
        Self::from_grid(self.depth.zip_map(mask, |&d, &m| if m { d } else { 0.0 }))
    }

    pub fn total(&self) -> f64 {
        self.depth.sum()
    }
}

pub(super) fn reconstruct_depth(frame: &TactileFrame, reference: &ReferenceModel) -> Result<DepthMap, TactileError> {
    check_dims(reference.dims(), frame.dims())?;
    let calib = reference.calib.as_ref().ok_or(TactileError::CalibrationMissing)?;
    // Darker than baseline is thinning (indentation); brighter pixels clamp to zero.
    let depth = reference
        .baseline
        .zip_map(frame.intensity(), |&b, &i| calib.eval(b - i));
    Ok(DepthMap::from_grid(depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> CalibrationCurve {
        CalibrationCurve::new(vec![(0.0, 0.0), (0.2, 1.0), (0.6, 3.0)]).unwrap()
    }

    #[test]
    fn interpolates_and_saturates() {
        let c = curve();
        assert_eq!(c.eval(0.0), 0.0);
        assert_eq!(c.eval(-0.3), 0.0);
        assert!((c.eval(0.1) - 0.5).abs() < 1e-12);
        assert!((c.eval(0.4) - 2.0).abs() < 1e-12);
        assert_eq!(c.eval(0.9), 3.0);
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(CalibrationCurve::new(vec![(0.0, 0.0), (0.2, 1.0), (0.2, 2.0)]).is_err());
        assert!(CalibrationCurve::new(vec![(0.0, 0.0), (0.2, 1.0), (0.3, 0.5)]).is_err());
        assert!(CalibrationCurve::new(vec![(0.1, 0.0), (0.2, 1.0)]).is_err());
        assert!(CalibrationCurve::new(vec![(0.0, 0.0)]).is_err());
    }

    fn reference(calib: Option<CalibrationCurve>) -> ReferenceModel {
        ReferenceModel {
            baseline: Grid::filled(16, 16, 0.8),
            noise_sigma: 0.0,
            calib,
        }
    }

    #[test]
    fn baseline_frame_is_flat() {
        let r = reference(Some(curve()));
        let f = TactileFrame::new(Grid::filled(16, 16, 0.8), 0, 0).unwrap();
        let d = reconstruct_depth(&f, &r).unwrap();
        assert!(d.depth.iter().all(|&v| v == 0.0));
        assert_eq!(d.max_depth, 0.0);
    }

    #[test]
    fn bright_pixels_clamp_to_zero() {
        let r = reference(Some(curve()));
        let mut g = Grid::filled(16, 16, 0.8);
        g.set(2, 2, 0.95);
        g.set(5, 5, 0.6);
        let f = TactileFrame::new(g, 0, 0).unwrap();
        let d = reconstruct_depth(&f, &r).unwrap();
        assert_eq!(*d.depth.get(2, 2), 0.0);
        assert!((*d.depth.get(5, 5) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn missing_calibration() {
        let r = reference(None);
        let f = TactileFrame::new(Grid::filled(16, 16, 0.8), 0, 0).unwrap();
        assert_eq!(reconstruct_depth(&f, &r), Err(TactileError::CalibrationMissing));
    }
}
