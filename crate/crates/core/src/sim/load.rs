use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::rng_from;

/// Electrode-skin load seen by the current monitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkinLoad {
    pub resistance_kohm: f64,
    /// Load at which the monitor reads exactly the commanded current.
    pub nominal_kohm: f64,
    /// Random-walk step scale, kOhm per second.
    pub drift_rate_kohm_per_s: f64,
    pub min_kohm: f64,
    pub max_kohm: f64,
}

impl Default for SkinLoad {
    fn default() -> Self {
        Self {
            resistance_kohm: 50.0,
            nominal_kohm: 100.0,
            drift_rate_kohm_per_s: 0.0,
            min_kohm: 1.0,
            max_kohm: 100.0,
        }
    }
}

impl SkinLoad {
    pub fn fixed(resistance_kohm: f64) -> Self {
        Self {
            resistance_kohm,
            ..Self::default()
        }
    }

    /// Reading for `drive_ma` through the current resistance.
    pub fn measure(&self, drive_ma: f64) -> f64 {
        drive_ma * self.nominal_kohm / self.resistance_kohm
    }

    fn reflect(&self, mut r: f64) -> f64 {
        let (lo, hi) = (self.min_kohm, self.max_kohm);
        let span = hi - lo;
        if span <= 0.0 {
            return lo;
        }
        // Fold into [lo, hi] by reflecting at both walls.
        let period = 2.0 * span;
        let mut off = (r - lo) % period;
        if off < 0.0 {
            off += period;
        }
        r = if off <= span { lo + off } else { hi - (off - span) };
        r.clamp(lo, hi)
    }
}

/// Advances the load by `dt_ms` of bounded random-walk drift and returns the
/// monitor reading for `drive_ma`. Non-positive steps leave the load unchanged.
pub fn step_load(load: &SkinLoad, drive_ma: f64, dt_ms: f64, seed: u64) -> (SkinLoad, f64) {
    let mut next = *load;
    if dt_ms > 0.0 && load.drift_rate_kohm_per_s > 0.0 {
        let z: f64 = StandardNormal.sample(&mut rng_from(seed));
        let step = load.drift_rate_kohm_per_s * (dt_ms / 1000.0) * z;
        next.resistance_kohm = load.reflect(load.resistance_kohm + step);
    } else {
        next.resistance_kohm = load.reflect(load.resistance_kohm);
    }
    let measured = next.measure(drive_ma);
    (next, measured)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_seed;
    use proptest::prelude::*;

    #[test]
    fn zero_drive_reads_zero() {
        let (_, m) = step_load(&SkinLoad::fixed(10.0), 0.0, 1.0, 1);
        assert_eq!(m, 0.0);
    }

    #[test]
    fn nominal_load_is_identity() {
        let load = SkinLoad::fixed(100.0);
        let (next, m) = step_load(&load, 1.7, 1.0, 9);
        assert_eq!(m, 1.7);
        assert_eq!(next, load);
    }

    #[test]
    fn reflection() {
        let load = SkinLoad::default();
        assert_eq!(load.reflect(102.0), 98.0);
        assert_eq!(load.reflect(-1.0), 3.0);
        assert_eq!(load.reflect(50.0), 50.0);
        assert!((1.0..=100.0).contains(&load.reflect(1e6 + 0.3)));
    }

    #[test]
    fn ten_second_walk_stays_in_bounds() {
        // Random-walk oracle: 10 s at 1 ms ticks for a handful of seeds.
        for seed in 0..20u64 {
            let mut load = SkinLoad {
                resistance_kohm: 50.0,
                drift_rate_kohm_per_s: 5.0,
                ..SkinLoad::default()
            };
            for tick in 0..10_000 {
                load = step_load(&load, 1.0, 1.0, derive_seed(seed, tick)).0;
                assert!((1.0..=100.0).contains(&load.resistance_kohm));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn bounds_hold_for_any_seed(seed in any::<u64>(), start in 1.0f64..=100.0, rate in 0.0f64..50_000.0) {
            let mut load = SkinLoad { resistance_kohm: start, drift_rate_kohm_per_s: rate, ..SkinLoad::default() };
            for tick in 0..50 {
                load = step_load(&load, 1.0, 1.0, derive_seed(seed, tick)).0;
                prop_assert!((1.0..=100.0).contains(&load.resistance_kohm));
            }
        }
    }
}
