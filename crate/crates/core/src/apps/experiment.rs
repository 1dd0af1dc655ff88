//! Zone sensitivity experiment: press each finger zone, hold, optionally
//! stimulate the electrodes under the contact, rest, and score the percept.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AppError, BoxStats};
use crate::device::DeviceConfig;
use crate::rng::{derive_seed, rng_from};
use crate::sim::{default_baseline, perceive, render_frame, PressEvent};
use crate::stim::{clamp_safety, set_electrodes, GroundingConfig, StimParams, SwitchArray};
use crate::tactile::{CalibrationCurve, FingerZone, Perception, ReferenceModel, ZoneMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Baseline,
    Stimulated,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::Stimulated => "stimulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub contact_s: f64,
    pub rest_s: f64,
    pub trials_per_zone: usize,
    pub conditions: Vec<Condition>,
    pub zones: Vec<FingerZone>,
    pub tick_ms: f64,
    pub amplitude_ma: f64,
    pub frequency_hz: f64,
    pub press_radius_px: f64,
    /// Press depth is drawn uniformly from this range per trial, mm.
    pub press_depth_mm: (f64, f64),
    /// Spread of the synthetic participant's per-trial gain around 1.
    pub participant_jitter: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            contact_s: 2.0,
            rest_s: 10.0,
            trials_per_zone: 20,
            conditions: vec![Condition::Baseline, Condition::Stimulated],
            zones: FingerZone::ALL.to_vec(),
            tick_ms: 10.0,
            amplitude_ma: 2.0,
            frequency_hz: 50.0,
            press_radius_px: 4.0,
            press_depth_mm: (1.0, 2.0),
            participant_jitter: 0.06,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |m: &str| Err(AppError::Config(m.to_string()));
        if !(self.contact_s > 0.0) || !(self.rest_s > 0.0) {
            return bad("contact_s and rest_s must be positive");
        }
        if self.trials_per_zone == 0 {
            return bad("trials_per_zone must be at least 1");
        }
        if !(self.tick_ms > 0.0) {
            return bad("tick_ms must be positive");
        }
        let (lo, hi) = self.press_depth_mm;
        if !(lo > 0.0 && lo <= hi) {
            return bad("press_depth_mm must be an increasing positive range");
        }
        if !(self.participant_jitter >= 0.0) {
            return bad("participant_jitter must be non-negative");
        }
        Ok(())
    }

    fn ticks(&self, seconds: f64) -> u64 {
        ((seconds * 1000.0 / self.tick_ms).round() as u64).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub zone: FingerZone,
    pub condition: Condition,
    pub trial: usize,
    pub contact_start_us: u64,
    pub contact_end_us: u64,
    pub rest_end_us: u64,
    pub pressure: f64,
    pub intensity_score: f64,
    /// Zone the perception pipeline assigned to the contact, if any.
    pub detected_zone: Option<FingerZone>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSummary {
    pub zone: FingerZone,
    pub condition: Condition,
    pub n: usize,
    pub intensity: BoxStats,
    pub pressure: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneReport {
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<ZoneSummary>,
}

impl ZoneReport {
    /// Summaries for every zone/condition pair present, in first-seen order
    /// with conditions outermost.
    pub fn from_trials(trials: Vec<TrialRecord>) -> Self {
        let mut conditions = Vec::new();
        let mut zones = Vec::new();
        for t in &trials {
            if !conditions.contains(&t.condition) {
                conditions.push(t.condition);
            }
            if !zones.contains(&t.zone) {
                zones.push(t.zone);
            }
        }
        let mut summary = Vec::new();
        for &condition in &conditions {
            for &zone in &zones {
                let rows: Vec<&TrialRecord> = trials
                    .iter()
                    .filter(|t| t.zone == zone && t.condition == condition)
                    .collect();
                let pick = |f: fn(&TrialRecord) -> f64| rows.iter().map(|t| f(t)).collect::<Vec<_>>();
                let (Some(intensity), Some(pressure)) = (
                    BoxStats::from_samples(&pick(|t| t.intensity_score)),
                    BoxStats::from_samples(&pick(|t| t.pressure)),
                ) else {
                    continue;
                };
                summary.push(ZoneSummary {
                    zone,
                    condition,
                    n: rows.len(),
                    intensity,
                    pressure,
                });
            }
        }
        Self { trials, summary }
    }

    pub fn summary_for(&self, zone: FingerZone, condition: Condition) -> Option<&ZoneSummary> {
        self.summary.iter().find(|s| s.zone == zone && s.condition == condition)
    }

    pub fn samples(&self, zone: FingerZone, condition: Condition) -> impl Iterator<Item = &TrialRecord> {
        self.trials
            .iter()
            .filter(move |t| t.zone == zone && t.condition == condition)
    }

    pub fn trials_csv(&self) -> Result<String, AppError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["zone", "condition", "trial", "pressure", "intensity_score"])?;
        for t in &self.trials {
            w.write_record([
                t.zone.name().to_string(),
                t.condition.name().to_string(),
                t.trial.to_string(),
                t.pressure.to_string(),
                t.intensity_score.to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    pub fn boxplot_csv(&self) -> Result<String, AppError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["zone", "condition", "metric", "n", "min", "q1", "median", "q3", "max"])?;
        for s in &self.summary {
            for (metric, b) in [("intensity_score", s.intensity), ("pressure", s.pressure)] {
                w.write_record([
                    s.zone.name().to_string(),
                    s.condition.name().to_string(),
                    metric.to_string(),
                    s.n.to_string(),
                    b.min.to_string(),
                    b.q1.to_string(),
                    b.median.to_string(),
                    b.q3.to_string(),
                    b.max.to_string(),
                ])?;
            }
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    /// Writes `trials.csv` and `boxplot.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>, AppError> {
        let trials = dir.join("trials.csv");
        let boxplot = dir.join("boxplot.csv");
        std::fs::write(&trials, self.trials_csv()?)?;
        std::fs::write(&boxplot, self.boxplot_csv()?)?;
        Ok(vec![trials, boxplot])
    }
}

/// Press location inside `zone`: the zone centre nudged by up to one pixel.
fn press_center(zones: &ZoneMap, zone: FingerZone, rng: &mut impl Rng) -> Result<(f64, f64), AppError> {
    let (cx, cy) = zones.zone_center(zone).ok_or(AppError::ZoneMissing(zone))?;
    let (w, h) = zones.dims();
    let x = (cx as i64 + rng.random_range(-1..=1)).clamp(0, w as i64 - 1) as usize;
    let y = (cy as i64 + rng.random_range(-1..=1)).clamp(0, h as i64 - 1) as usize;
    Ok(if zones.labels().get(x, y) == &Some(zone) {
        (x as f64, y as f64)
    } else {
        (cx as f64, cy as f64)
    })
}

pub fn run_zone_experiment(cfg: &ExperimentConfig, device: &DeviceConfig, seed: u64) -> Result<ZoneReport, AppError> {
    cfg.validate()?;
    let sensor = &device.sensor;
    let (w, h) = (sensor.width, sensor.height);
    let zones = ZoneMap::default_layout(w, h);
    for &z in &cfg.zones {
        zones.zone_center(z).ok_or(AppError::ZoneMissing(z))?;
    }
    let baseline = default_baseline(w, h);
    let reference = ReferenceModel {
        baseline: baseline.clone(),
        noise_sigma: device.membrane.noise_sigma,
        calib: Some(CalibrationCurve::new(device.perception.calib_knots.clone())?),
    };
    let perception = Perception::new(device.perception.clone());
    let layout = sensor.layout();
    let idle = SwitchArray::new(layout.len(), GroundingConfig::new(device.stim.grounding));
    let tick_us = (cfg.tick_ms * 1000.0).round() as u64;
    let contact_ticks = cfg.ticks(cfg.contact_s);
    let rest_ticks = cfg.ticks(cfg.rest_s);
    let frame_every = ((sensor.frame_interval_us as f64 / tick_us as f64).round() as u64).max(1);
    let jitter = Normal::new(1.0, cfg.participant_jitter).map_err(|e| AppError::Config(e.to_string()))?;

    let mut trials = Vec::new();
    let mut clock_us = 0u64;
    let mut index = 0u64;
    for &condition in &cfg.conditions {
        for &zone in &cfg.zones {
            for trial in 0..cfg.trials_per_zone {
                let trial_seed = derive_seed(seed, index);
                index += 1;
                let mut rng = rng_from(trial_seed);
                let press = PressEvent::new(
                    press_center(&zones, zone, &mut rng)?,
                    cfg.press_radius_px,
                    rng.random_range(cfg.press_depth_mm.0..=cfg.press_depth_mm.1),
                );
                let gain: f64 = jitter.sample(&mut rng).max(0.0);

                let contact_start_us = clock_us;
                let (mut pressure_sum, mut score_sum, mut frames) = (0.0, 0.0, 0u64);
                let mut detected_zone = None;
                for tick in 0..contact_ticks {
                    if tick % frame_every == 0 {
                        let frame =
                            render_frame(&[press], &device.membrane, &baseline, derive_seed(trial_seed, tick + 1))?
                                .with_meta(frames as u32, clock_us);
                        frames += 1;
                        if let Some(patch) = perception.detect_contact(&frame, &reference)? {
                            pressure_sum += patch.force.normal;
                            let detected = zones.classify(&patch).ok();
                            detected_zone = detected_zone.or(detected);
                            if condition == Condition::Stimulated {
                                let array = set_electrodes(&idle, Some(&patch), &layout);
                                let mut params = StimParams::new(
                                    &device.stim,
                                    cfg.amplitude_ma,
                                    array.stim_electrodes().into_iter().collect(),
                                );
                                params.frequency_hz = cfg.frequency_hz;
                                params.duration_ms = (cfg.contact_s * 1000.0).round() as u32;
                                let (params, _) = clamp_safety(&params, &device.stim.safety_limits());
                                let felt = perceive(&array, &params, detected.unwrap_or(zone), &device.sensitivity);
                                score_sum += felt.intensity_score;
                            }
                        }
                    }
                    clock_us += tick_us;
                }
                let contact_end_us = clock_us;
                clock_us += rest_ticks * tick_us;
                let n = frames.max(1) as f64;
                trials.push(TrialRecord {
                    zone,
                    condition,
                    trial,
                    contact_start_us,
                    contact_end_us,
                    rest_end_us: clock_us,
                    pressure: pressure_sum / n,
                    intensity_score: (gain * score_sum / n).clamp(0.0, 1.0),
                    detected_zone,
                });
            }
        }
    }

    Ok(ZoneReport::from_trials(trials))
}
