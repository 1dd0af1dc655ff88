use serde::{Deserialize, Serialize};

use super::{StimError, MAX_AMPLITUDE_MA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegulatorConfig {
    pub kp: f64,
    /// Integral gain per millisecond.
    pub ki_per_ms: f64,
    /// Integral term is held within +/- this multiple of the setpoint.
    pub windup_factor: f64,
    /// Drive scale applied before the first measurement arrives.
    pub initial_drive_gain: f64,
    pub max_commanded_ma: f64,
}

impl Default for RegulatorConfig {
    fn default() -> Self {
        Self {
            kp: 0.2,
            ki_per_ms: 0.6,
            windup_factor: 2.0,
            initial_drive_gain: 0.1,
            max_commanded_ma: MAX_AMPLITUDE_MA,
        }
    }
}

/// PI state for one channel. `drive_gain` is the current output scale: the
/// commanded amplitude is `drive_gain * setpoint_ma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegulatorState {
    pub setpoint_ma: f64,
    /// Accumulated (load-normalised) error, mA*ms.
    pub integrator: f64,
    pub last_error_ma: f64,
    pub drive_gain: f64,
}

impl RegulatorState {
    pub fn commanded_ma(&self) -> f64 {
        self.drive_gain * self.setpoint_ma
    }
}

/// Discrete PI current regulator with gain scheduling on the observed load.
///
/// The monitor reports a current proportional to the commanded one with an
/// unknown, drifting gain (the skin load). Each update converts the error
/// into commanded-current units using the ratio observed on this tick, so
/// the loop dynamics do not depend on the load.
#[derive(Debug, Clone, Default)]
pub struct Regulator {
    pub config: RegulatorConfig,
}

const MIN_DRIVE_GAIN: f64 = 1e-9;

impl Regulator {
    pub fn new(config: RegulatorConfig) -> Self {
        Self { config }
    }

    pub fn start(&self, setpoint_ma: f64) -> RegulatorState {
        let setpoint_ma = setpoint_ma.clamp(0.0, self.config.max_commanded_ma);
        let drive_gain = self.config.initial_drive_gain.max(MIN_DRIVE_GAIN);
        let commanded = (drive_gain * setpoint_ma).min(self.config.max_commanded_ma);
        RegulatorState {
            setpoint_ma,
            integrator: if self.config.ki_per_ms > 0.0 {
                commanded / self.config.ki_per_ms
            } else {
                0.0
            },
            last_error_ma: 0.0,
            drive_gain,
        }
    }

    /// Advances the controller by `dt_ms` given the monitor reading taken
    /// while driving at `state.commanded_ma()`. Returns the new state and the
    /// drive scale to apply to the synthesized waveform.
    pub fn regulate(
        &self,
        state: &RegulatorState,
        measured_ma: f64,
        dt_ms: f64,
    ) -> Result<(RegulatorState, f64), StimError> {
        if !measured_ma.is_finite() {
            return Err(StimError::NonFiniteMeasurement);
        }
        if !(dt_ms > 0.0) {
            return Err(StimError::BadTimeStep(dt_ms));
        }
        let cfg = &self.config;
        let sp = state.setpoint_ma;
        if sp <= 0.0 {
            let next = RegulatorState {
                integrator: 0.0,
                last_error_ma: -measured_ma,
                ..*state
            };
            return Ok((next, 0.0));
        }
        let error = sp - measured_ma;
        let commanded = state.commanded_ma();
        // Error expressed as the change in commanded current that would null it.
        let scheduled_error = if measured_ma > 1e-9 && commanded > 0.0 {
            commanded * (sp / measured_ma - 1.0)
        } else {
            error
        };

        let i_limit = if cfg.ki_per_ms > 0.0 {
            cfg.windup_factor * sp / cfg.ki_per_ms
        } else {
            0.0
        };
        let integrator = (state.integrator + scheduled_error * dt_ms).clamp(-i_limit, i_limit);
        let out = (cfg.kp * scheduled_error + cfg.ki_per_ms * integrator).clamp(0.0, cfg.max_commanded_ma);
        let drive_gain = (out / sp).max(MIN_DRIVE_GAIN);
        let next = RegulatorState {
            setpoint_ma: sp,
            integrator,
            last_error_ma: error,
            drive_gain,
        };
        Ok((next, drive_gain))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Static resistive plant: reading = commanded * r_nominal / r.
    fn run(reg: &Regulator, setpoint: f64, loads: &[(f64, usize)]) -> Vec<(f64, f64)> {
        let mut st = reg.start(setpoint);
        let mut trace = Vec::new();
        for &(r, ticks) in loads {
            for _ in 0..ticks {
                let commanded = st.commanded_ma();
                let measured = commanded * 100.0 / r;
                trace.push((commanded, measured));
                st = reg.regulate(&st, measured, 1.0).unwrap().0;
            }
        }
        trace
    }

    #[test]
    fn zero_error_keeps_scale() {
        let reg = Regulator::default();
        // settle first so last_error is zero
        let mut st = reg.start(1.0);
        for _ in 0..200 {
            let m = st.commanded_ma() * 100.0 / 10.0;
            st = reg.regulate(&st, m, 1.0).unwrap().0;
        }
        let exact = RegulatorState {
            last_error_ma: 0.0,
            ..st
        };
        let (next, scale) = reg.regulate(&exact, exact.setpoint_ma, 1.0).unwrap();
        assert_eq!(scale, exact.drive_gain);
        assert_eq!(next.drive_gain, exact.drive_gain);
        assert_eq!(next.last_error_ma, 0.0);
    }

    #[test]
    fn settles_on_10k_load() {
        let trace = run(&Regulator::default(), 1.0, &[(10.0, 60)]);
        for &(c, m) in &trace[50..] {
            assert!((m - 1.0).abs() <= 0.05, "{m}");
            assert!(c <= 5.0);
        }
    }

    #[test]
    fn rejects_nan_and_bad_dt() {
        let reg = Regulator::default();
        let st = reg.start(1.0);
        assert_eq!(reg.regulate(&st, f64::NAN, 1.0), Err(StimError::NonFiniteMeasurement));
        assert!(matches!(reg.regulate(&st, 0.5, 0.0), Err(StimError::BadTimeStep(_))));
    }

    #[test]
    fn integrator_bounded() {
        let reg = Regulator::default();
        let mut st = reg.start(2.0);
        // Open circuit: the monitor reads nothing no matter what is commanded.
        for _ in 0..1000 {
            st = reg.regulate(&st, 0.0, 1.0).unwrap().0;
            assert!(reg.config.ki_per_ms * st.integrator.abs() <= 2.0 * 2.0 + 1e-9);
            assert!(st.commanded_ma() <= 5.0 + 1e-12);
        }
    }

    #[test]
    fn zero_setpoint_drives_nothing() {
        let reg = Regulator::default();
        let st = reg.start(0.0);
        let (_, scale) = reg.regulate(&st, 0.0, 1.0).unwrap();
        assert_eq!(scale, 0.0);
    }
}
