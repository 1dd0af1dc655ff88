use serde::{Deserialize, Serialize};

use super::{DepthMap, FlowField, PerceptionConfig};

/// Calibrated force proxy; units are arbitrary but consistent across a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceEstimate {
    pub normal: f64,
    pub shear: (f64, f64),
    /// `atan2(shear.1, shear.0)`, or 0 when there is no shear.
    pub direction: f64,
}

pub(super) fn estimate_force(depth: &DepthMap, flow: &FlowField, config: &PerceptionConfig) -> ForceEstimate {
    let normal = config.normal_gain * depth.depth.iter().map(|d| d.max(0.0)).sum::<f64>();
    let shear = (
        config.shear_gain * flow.mean_flow.0,
        config.shear_gain * flow.mean_flow.1,
    );
    let direction = if shear.0 != 0.0 || shear.1 != 0.0 {
        shear.1.atan2(shear.0)
    } else {
        0.0
    };
    ForceEstimate {
        normal,
        shear,
        direction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn flow(mean: (f64, f64)) -> FlowField {
        FlowField {
            mean_flow: mean,
            confidence: 1.0,
            ..FlowField::empty(8, 64, 64)
        }
    }

    #[test]
    fn zero_inputs_zero_force() {
        let f = estimate_force(
            &DepthMap::zeros(16, 16),
            &FlowField::empty(8, 16, 16),
            &PerceptionConfig::default(),
        );
        assert_eq!(f, ForceEstimate::default());
    }

    #[test]
    fn normal_is_linear_in_depth() {
        let cfg = PerceptionConfig::default();
        let g = Grid::from_fn(16, 16, |x, y| ((x * y) % 7) as f64 * 0.1);
        let a = estimate_force(&DepthMap::from_grid(g.clone()), &flow((0.0, 0.0)), &cfg);
        let b = estimate_force(&DepthMap::from_grid(g.map(|v| v * 2.0)), &flow((0.0, 0.0)), &cfg);
        assert_eq!(b.normal, 2.0 * a.normal);
    }

    #[test]
    fn shear_follows_mean_flow() {
        let cfg = PerceptionConfig {
            shear_gain: 0.1,
            ..Default::default()
        };
        let depth = DepthMap::from_grid(Grid::from_fn(16, 16, |x, _| if x == 8 { 1.0 } else { 0.0 }));
        let f = estimate_force(&depth, &flow((3.0, 0.0)), &cfg);
        assert!((f.shear.0 - 0.3).abs() < 1e-12);
        assert_eq!(f.shear.1, 0.0);
        assert_eq!(f.direction, 0.0);
        let g = estimate_force(&depth, &flow((0.0, -2.0)), &cfg);
        assert!((g.direction + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
