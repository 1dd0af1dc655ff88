use serde::{Deserialize, Serialize};

use super::{check_dims, CalibrationCurve, PerceptionConfig, TactileError, TactileFrame};
use crate::grid::Grid;

/// No-contact baseline plus the intensity-deficit -> depth calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceModel {
    pub baseline: Grid<f64>,
    pub noise_sigma: f64,
    pub calib: Option<CalibrationCurve>,
}

impl ReferenceModel {
    pub fn dims(&self) -> (usize, usize) {
        self.baseline.dims()
    }
}

pub(super) fn set_reference(
    frames: &[TactileFrame],
    config: &PerceptionConfig,
) -> Result<ReferenceModel, TactileError> {
    let first = frames.first().ok_or(TactileError::EmptyReference)?;
    let dims = first.dims();
    for f in frames {
        check_dims(dims, f.dims())?;
    }
    let (w, h) = dims;
    // Welford per pixel: exact for constant input.
    let mut mean = Grid::filled(w, h, 0.0);
    let mut m2 = Grid::filled(w, h, 0.0);
    for (k, f) in frames.iter().enumerate() {
        let k = (k + 1) as f64;
        for ((m, s), &v) in mean
            .as_mut_slice()
            .iter_mut()
            .zip(m2.as_mut_slice().iter_mut())
            .zip(f.intensity().iter())
        {
            let d = v - *m;
            *m += d / k;
            *s += d * (v - *m);
        }
    }
    // RMS of the per-pixel population standard deviations.
    let n = frames.len() as f64;
    let noise_sigma = (m2.sum() / (n * (w * h) as f64)).max(0.0).sqrt();
    let calib = CalibrationCurve::new(config.calib_knots.clone())?;
    Ok(ReferenceModel {
        baseline: mean,
        noise_sigma,
        calib: Some(calib),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand_distr::{Distribution, Normal};

    fn flat(v: f64) -> TactileFrame {
        TactileFrame::new(Grid::filled(16, 16, v), 0, 0).unwrap()
    }

    #[test]
    fn identical_frames_give_zero_sigma() {
        let frames: Vec<_> = (0..10).map(|_| flat(0.8)).collect();
        let r = set_reference(&frames, &PerceptionConfig::default()).unwrap();
        assert!(r.baseline.iter().all(|&b| (b - 0.8).abs() < 1e-12));
        assert_eq!(r.noise_sigma, 0.0);
    }

    #[test]
    fn baseline_is_mean() {
        let r = set_reference(&[flat(0.6), flat(0.8)], &PerceptionConfig::default()).unwrap();
        assert!(r.baseline.iter().all(|&b| (b - 0.7).abs() < 1e-12));
    }

    #[test]
    fn noisy_frames_recover_sigma() {
        let mut rng = rng_from(11);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let frames: Vec<_> = (0..100)
            .map(|_| {
                let g = Grid::from_fn(32, 32, |_, _| (0.8_f64 + noise.sample(&mut rng)).clamp(0.0, 1.0));
                TactileFrame::new(g, 0, 0).unwrap()
            })
            .collect();
        // Oracle: sample statistics computed independently over the same frames.
        let n = frames.len() as f64;
        let mut acc = 0.0;
        for i in 0..32 * 32 {
            let vals: Vec<f64> = frames.iter().map(|f| f.intensity().as_slice()[i]).collect();
            let m = vals.iter().sum::<f64>() / n;
            acc += vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
        }
        let oracle = (acc / 1024.0).sqrt();
        let r = set_reference(&frames, &PerceptionConfig::default()).unwrap();
        assert!((r.noise_sigma - oracle).abs() < 1e-12);
        assert!((0.008..=0.012).contains(&r.noise_sigma), "{}", r.noise_sigma);
    }

    #[test]
    fn errors() {
        assert_eq!(
            set_reference(&[], &PerceptionConfig::default()),
            Err(TactileError::EmptyReference)
        );
        let other = TactileFrame::new(Grid::filled(20, 16, 0.5), 0, 0).unwrap();
        assert!(matches!(
            set_reference(&[flat(0.5), other], &PerceptionConfig::default()),
            Err(TactileError::DimensionMismatch { .. })
        ));
    }
}
