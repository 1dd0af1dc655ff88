//! Teleoperated gripper: the operator sets an aperture, the gripper squeezes
//! a soft object, and grip force comes back as stimulation frequency.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AppError;
use crate::rng::rng_from;
use crate::stim::{Channel, Polarity, StimParams, DEFAULT_PULSE_WIDTH_US, MAX_FREQUENCY_HZ, MIN_FREQUENCY_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspObject {
    /// Force per mm of squeeze.
    pub stiffness: f64,
    pub size_mm: f64,
    pub crush_limit: f64,
}

impl GraspObject {
    /// Random soft object.
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            stiffness: rng.random_range(0.3..=1.0),
            size_mm: rng.random_range(30.0..=60.0),
            crush_limit: rng.random_range(8.0..=12.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TeleopConfig {
    pub max_rate_mm_s: f64,
    pub initial_aperture_mm: f64,
    /// Below this grip force a lifted object slips.
    pub slip_threshold: f64,
    /// Normalisers for the feedback map.
    pub grip_norm: f64,
    pub stiffness_norm: f64,
    pub feedback_gain_hz: f64,
    pub amplitude_ma: f64,
    pub electrodes: BTreeSet<u16>,
    pub tick_s: f64,
    /// Target feedback band for the band-following operator, Hz.
    pub band_hz: (f64, f64),
    /// Aperture the open-loop operator drives straight to, mm.
    pub open_loop_aperture_mm: f64,
    /// Time allowed to settle the grasp before lifting.
    pub grasp_s: f64,
    pub lift_s: f64,
}

impl Default for TeleopConfig {
    fn default() -> Self {
        Self {
            max_rate_mm_s: 20.0,
            initial_aperture_mm: 80.0,
            slip_threshold: 1.0,
            grip_norm: 10.0,
            stiffness_norm: 1.0,
            feedback_gain_hz: 20.0,
            amplitude_ma: 1.0,
            electrodes: BTreeSet::from([5, 6, 9, 10]),
            tick_s: 0.01,
            band_hz: (3.0, 4.0),
            open_loop_aperture_mm: 5.0,
            grasp_s: 5.0,
            lift_s: 1.0,
        }
    }
}

impl TeleopConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |m: &str| Err(AppError::Config(m.to_string()));
        if !(self.max_rate_mm_s > 0.0) || !(self.tick_s > 0.0) {
            return bad("max_rate_mm_s and tick_s must be positive");
        }
        if !(self.grip_norm > 0.0) || !(self.stiffness_norm > 0.0) || !(self.feedback_gain_hz >= 0.0) {
            return bad("feedback normalisers must be positive");
        }
        if !(self.band_hz.0 <= self.band_hz.1) {
            return bad("band_hz must be increasing");
        }
        if self.electrodes.is_empty() {
            return bad("feedback electrodes must not be empty");
        }
        Ok(())
    }

    /// Feedback frequency for a grip on an object of `stiffness`: harder
    /// contact maps to a faster pulse rate.
    pub fn feedback_hz(&self, grip_force: f64, stiffness: f64) -> f64 {
        let g = grip_force.max(0.0) / self.grip_norm;
        let k = stiffness.max(0.0) / self.stiffness_norm;
        (MIN_FREQUENCY_HZ + self.feedback_gain_hz * g * k).clamp(MIN_FREQUENCY_HZ, MAX_FREQUENCY_HZ)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeleopInput {
    pub aperture_mm: f64,
    pub lift: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleopState {
    pub aperture_mm: f64,
    pub grip_force: f64,
    pub object: GraspObject,
    pub lifting: bool,
    pub slip: bool,
    pub crushed: bool,
    pub time_s: f64,
}

impl TeleopState {
    pub fn new(cfg: &TeleopConfig, object: GraspObject) -> Self {
        let mut s = Self {
            aperture_mm: cfg.initial_aperture_mm.max(0.0),
            grip_force: 0.0,
            object,
            lifting: false,
            slip: false,
            crushed: false,
            time_s: 0.0,
        };
        s.grip_force = grip_force(&s.object, s.aperture_mm);
        s
    }
}

pub fn grip_force(object: &GraspObject, aperture_mm: f64) -> f64 {
    object.stiffness * (object.size_mm - aperture_mm).max(0.0)
}

/// One gripper tick: slew toward the commanded aperture, update grip and
/// the slip/crush flags, and emit the feedback command while gripping.
pub fn step_teleop(
    cfg: &TeleopConfig,
    state: &TeleopState,
    input: TeleopInput,
    dt_s: f64,
) -> (TeleopState, Option<StimParams>) {
    let mut s = state.clone();
    if !(dt_s > 0.0) {
        return (s, None);
    }
    s.time_s += dt_s;
    let step = cfg.max_rate_mm_s * dt_s;
    let target = input.aperture_mm.max(0.0);
    s.aperture_mm += (target - s.aperture_mm).clamp(-step, step);
    s.grip_force = grip_force(&s.object, s.aperture_mm);
    s.crushed |= s.grip_force > s.object.crush_limit;
    s.lifting = input.lift;
    s.slip = s.lifting && s.grip_force < cfg.slip_threshold;
    let command = (s.grip_force > 0.0).then(|| StimParams {
        channel: Channel::Ac1,
        frequency_hz: cfg.feedback_hz(s.grip_force, s.object.stiffness),
        amplitude_ma: cfg.amplitude_ma,
        polarity: Polarity::Alternating,
        pulse_width_us: DEFAULT_PULSE_WIDTH_US,
        duration_ms: (dt_s * 1000.0).ceil() as u32,
        electrodes: cfg.electrodes.clone(),
    });
    (s, command)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// Closes while the felt frequency is below the band, opens above it.
    BandFollowing,
    /// Drives straight to a fixed aperture, ignoring feedback.
    OpenLoop,
}

/// Scripted operator policy.
pub fn operator_input(
    cfg: &TeleopConfig,
    kind: OperatorKind,
    state: &TeleopState,
    feedback_hz: Option<f64>,
) -> TeleopInput {
    let lift = state.time_s >= cfg.grasp_s;
    let aperture_mm = match kind {
        OperatorKind::OpenLoop => cfg.open_loop_aperture_mm,
        OperatorKind::BandFollowing => {
            let f = feedback_hz.unwrap_or(0.0);
            if f < cfg.band_hz.0 {
                0.0
            } else if f > cfg.band_hz.1 {
                state.aperture_mm + cfg.max_rate_mm_s
            } else {
                state.aperture_mm
            }
        }
    };
    TeleopInput { aperture_mm, lift }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspOutcome {
    pub operator: OperatorKind,
    pub object: GraspObject,
    pub crushed: bool,
    pub slipped: bool,
    pub final_grip: f64,
    pub peak_grip: f64,
    pub final_feedback_hz: Option<f64>,
    /// First time the grip reached its final value within 1%, s.
    pub settle_s: Option<f64>,
    pub commands: usize,
}

/// Runs one grasp-and-lift episode for `kind`, feeding back the previous
/// tick's frequency. `on_tick` sees every input, state and command.
pub fn run_grasp(
    cfg: &TeleopConfig,
    kind: OperatorKind,
    object: GraspObject,
    mut on_tick: impl FnMut(&TeleopInput, &TeleopState, Option<&StimParams>),
) -> GraspOutcome {
    let mut s = TeleopState::new(cfg, object);
    let ticks = ((cfg.grasp_s + cfg.lift_s) / cfg.tick_s).round() as u64;
    let (mut felt, mut peak, mut slipped, mut commands) = (None, 0.0f64, false, 0);
    let mut grips = Vec::with_capacity(ticks as usize);
    for _ in 0..ticks {
        let input = operator_input(cfg, kind, &s, felt);
        let (next, cmd) = step_teleop(cfg, &s, input, cfg.tick_s);
        on_tick(&input, &next, cmd.as_ref());
        felt = cmd.as_ref().map(|c| c.frequency_hz);
        commands += cmd.is_some() as usize;
        peak = peak.max(next.grip_force);
        slipped |= next.slip;
        grips.push((next.time_s, next.grip_force));
        s = next;
    }
    let final_grip = s.grip_force;
    let settle_s = grips
        .iter()
        .rev()
        .take_while(|(_, g)| (g - final_grip).abs() <= 0.01 * final_grip.max(1e-9))
        .last()
        .map(|&(t, _)| t);
    GraspOutcome {
        operator: kind,
        object,
        crushed: s.crushed,
        slipped,
        final_grip,
        peak_grip: peak,
        final_feedback_hz: felt,
        settle_s,
        commands,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedOutcome {
    pub band_following: GraspOutcome,
    pub open_loop: GraspOutcome,
}

/// Both operators on the same `n` random objects.
pub fn compare_operators(cfg: &TeleopConfig, n: usize, seed: u64) -> Result<Vec<PairedOutcome>, AppError> {
    cfg.validate()?;
    let mut rng = rng_from(seed);
    Ok((0..n)
        .map(|_| {
            let object = GraspObject::random(&mut rng);
            PairedOutcome {
                band_following: run_grasp(cfg, OperatorKind::BandFollowing, object, |_, _, _| {}),
                open_loop: run_grasp(cfg, OperatorKind::OpenLoop, object, |_, _, _| {}),
            }
        })
        .collect())
}
