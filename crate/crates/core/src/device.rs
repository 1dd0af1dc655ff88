//! Simulated terminal unit: the sensor and stimulator behind one message
//! interface. A single owner feeds it commands and clock ticks; everything
//! it reports goes out as protocol messages.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::protocol::{
    chunk_frame, Ack, AppEvent, ErrorReport, Message, Payload, PerceptEvent, SeqCounter, Telemetry, FRAME_CHUNK_BYTES,
};
use crate::rng::derive_seed;
use crate::sim::{
    default_baseline, perceive, render_frame, step_load, step_power, MembraneModel, PowerState, PressEvent,
    SensitivityTable, SimError, SkinLoad,
};
use crate::stim::{
    clamp_safety, Channel, ElectrodeLayout, GroundingConfig, Regulator, RegulatorState, StimConfig, StimError,
    StimParams, SwitchArray, SwitchState,
};
use crate::tactile::fixture::encode_frame;
use crate::tactile::{Perception, PerceptionConfig, ReferenceModel, TactileError, ZoneMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorConfig {
    pub width: usize,
    pub height: usize,
    pub frame_interval_us: u64,
    pub electrode_cols: usize,
    pub electrode_rows: usize,
    /// Radius of a touchpad press, pixels.
    pub touch_radius_px: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            frame_interval_us: 33_333,
            electrode_cols: 4,
            electrode_rows: 4,
            touch_radius_px: 6.0,
        }
    }
}

impl SensorConfig {
    pub fn layout(&self) -> ElectrodeLayout {
        ElectrodeLayout::grid(self.electrode_cols, self.electrode_rows, self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerConfig {
    pub boot_ms: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { boot_ms: 200.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceConfig {
    pub sensor: SensorConfig,
    pub membrane: MembraneModel,
    pub perception: PerceptionConfig,
    pub stim: StimConfig,
    pub load: SkinLoad,
    pub power: PowerConfig,
    pub sensitivity: SensitivityTable,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stim(#[from] StimError),
    #[error(transparent)]
    Tactile(#[from] TactileError),
}

/// One channel's running command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDrive {
    pub params: StimParams,
    pub started_us: u64,
    pub regulator: RegulatorState,
    pub measured_ma: f64,
}

/// Snapshot of the simulated device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    pub time_us: u64,
    pub power: PowerState,
    pub channels: [Option<ChannelDrive>; 2],
    pub load: SkinLoad,
    pub switches: SwitchArray,
    pub presses: Vec<PressEvent>,
    pub frame_seq: u32,
}

impl DeviceState {
    pub fn measured_ma(&self) -> [f64; 2] {
        [0, 1].map(|i| self.channels[i].as_ref().map_or(0.0, |c| c.measured_ma.max(0.0)))
    }

    pub fn telemetry(&self) -> Telemetry {
        let switch_count = (self.switches.film.len() + self.switches.grounds.len()) as u16;
        Telemetry {
            measured_ma: self.measured_ma(),
            power_draw_ma: self.power.draw_ma,
            switch_count,
            switch_states: self.switches.pack(),
            timestamp_us: self.time_us,
        }
    }
}

fn channel_index(c: Channel) -> usize {
    match c {
        Channel::Ac1 => 0,
        Channel::Ac2 => 1,
    }
}

pub struct Device {
    config: DeviceConfig,
    seed: u64,
    state: DeviceState,
    out_seq: SeqCounter,
    ticks: u64,
    next_frame_us: u64,
    baseline: Grid<f64>,
    reference: ReferenceModel,
    perception: Perception,
    zones: ZoneMap,
    regulator: Regulator,
}

impl Device {
    /// Powers the device up; it draws start-up current until the boot interval ends.
    pub fn new(config: DeviceConfig, seed: u64) -> Result<Self, DeviceError> {
        let (w, h) = (config.sensor.width, config.sensor.height);
        let grounding = GroundingConfig::new(config.stim.grounding);
        grounding.validate()?;
        let baseline = default_baseline(w, h);
        let perception = Perception::new(config.perception.clone());
        let reference = ReferenceModel {
            baseline: baseline.clone(),
            noise_sigma: config.membrane.noise_sigma,
            calib: Some(crate::tactile::CalibrationCurve::new(
                config.perception.calib_knots.clone(),
            )?),
        };
        let film = config.sensor.layout().len();
        let state = DeviceState {
            time_us: 0,
            power: PowerState::startup(config.power.boot_ms),
            channels: [None, None],
            load: config.load,
            switches: SwitchArray::new(film, grounding),
            presses: Vec::new(),
            frame_seq: 0,
        };
        Ok(Self {
            regulator: Regulator::new(config.stim.regulator.clone()),
            zones: ZoneMap::default_layout(w, h),
            config,
            seed,
            state,
            out_seq: SeqCounter::new(),
            ticks: 0,
            next_frame_us: 0,
            baseline,
            reference,
            perception,
        })
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.config
    }

    pub fn state(&self) -> &DeviceState {
        &self.state
    }

    fn out(&mut self, payload: Payload) -> Message {
        Message::new(self.out_seq.next(), payload)
    }

    fn reject(&mut self, msg: String) -> Message {
        self.out(Payload::Error(ErrorReport::new(ErrorReport::REJECTED, msg)))
    }

    fn route_switches(&mut self) {
        let mut sw = self.state.switches.all_open();
        for ch in self.state.channels.iter().flatten() {
            for &e in &ch.params.electrodes {
                if let Some(s) = sw.film.get_mut(e as usize) {
                    *s = SwitchState::Stim;
                }
            }
        }
        if sw.any_stim() {
            let g = if sw.grounds.len() == 1 {
                0
            } else {
                sw.finger.min(sw.grounds.len() - 1)
            };
            sw.grounds[g] = SwitchState::Ground;
        }
        self.state.switches = sw;
    }

    fn start(&mut self, params: StimParams) -> Result<bool, String> {
        let (params, report) = clamp_safety(&params, &self.config.stim.safety_limits());
        params.validate().map_err(|e| e.to_string())?;
        let film = self.state.switches.film.len();
        if let Some(&bad) = params.electrodes.iter().find(|&&e| e as usize >= film) {
            return Err(format!("electrode {bad} does not exist ({film} on the film)"));
        }
        let idx = channel_index(params.channel);
        if params.duration_ms == 0 || params.amplitude_ma == 0.0 {
            self.state.channels[idx] = None;
        } else {
            self.state.channels[idx] = Some(ChannelDrive {
                regulator: self.regulator.start(params.amplitude_ma),
                started_us: self.state.time_us,
                measured_ma: 0.0,
                params,
            });
        }
        self.route_switches();
        Ok(report.is_clean())
    }

    fn touch(&mut self, event: &AppEvent) -> Result<(), String> {
        let s = &self.config.sensor;
        match event.name.as_str() {
            "release" => self.state.presses.clear(),
            "press" => {
                let get = |k: &str| {
                    event.data[k]
                        .as_f64()
                        .ok_or_else(|| format!("press needs numeric `{k}`"))
                        .map(|v| v.clamp(0.0, 1.0))
                };
                let (u, v, pressure) = (get("u")?, get("v")?, get("pressure")?);
                let center = (u * (s.width - 1) as f64, v * (s.height - 1) as f64);
                let depth = pressure * self.config.membrane.depth_cap_mm;
                self.state.presses = if depth > 0.0 {
                    vec![PressEvent::new(center, s.touch_radius_px, depth)]
                } else {
                    Vec::new()
                };
            }
            other => return Err(format!("unknown app event `{other}`")),
        }
        Ok(())
    }

    /// Applies one host message and returns the replies.
    pub fn handle(&mut self, msg: &Message) -> Vec<Message> {
        let outcome = match &msg.payload {
            Payload::StimCommand(p) => self.start(p.clone()).map(|clean| {
                (!clean).then(|| AppEvent {
                    name: "clamped".into(),
                    data: serde_json::json!({ "acked_seq": msg.seq }),
                })
            }),
            Payload::AppEvent(e) => self.touch(e).map(|_| None),
            other => Err(format!(
                "device does not accept {} messages",
                other.message_type().name()
            )),
        };
        match outcome {
            Ok(note) => {
                let mut out = vec![self.out(Payload::Ack(Ack {
                    acked_seq: Some(msg.seq),
                }))];
                if let Some(n) = note {
                    out.push(self.out(Payload::AppEvent(n)));
                }
                out
            }
            Err(e) => vec![self.reject(e)],
        }
    }

    /// Advances the device clock by `dt_ms`: power, regulation, load drift,
    /// command expiry and (when due) a rendered frame.
    pub fn tick(&mut self, dt_ms: f64) -> Result<Vec<Message>, DeviceError> {
        if !(dt_ms > 0.0) {
            return Err(SimError::BadTimeStep(dt_ms).into());
        }
        let mut out = Vec::new();
        self.state.power = step_power(&self.state.power, dt_ms)?;
        self.state.time_us += (dt_ms * 1000.0).round() as u64;
        let now = self.state.time_us;

        let mut expired = false;
        for ch in self.state.channels.iter_mut() {
            if let Some(c) = ch {
                if now >= c.started_us + c.params.duration_ms as u64 * 1000 {
                    *ch = None;
                    expired = true;
                }
            }
        }
        if expired {
            self.route_switches();
        }

        let load_seed = derive_seed(self.seed, 2 * self.ticks);
        self.ticks += 1;
        let drive0 = self.state.channels[0]
            .as_ref()
            .map_or(0.0, |c| c.regulator.commanded_ma());
        let (load, _) = step_load(&self.state.load, drive0, dt_ms, load_seed);
        self.state.load = load;
        for ch in self.state.channels.iter_mut().flatten() {
            let measured = load.measure(ch.regulator.commanded_ma());
            let (next, _) = self.regulator.regulate(&ch.regulator, measured, dt_ms)?;
            ch.regulator = next;
            ch.measured_ma = measured;
        }

        if now >= self.next_frame_us {
            self.next_frame_us = now + self.config.sensor.frame_interval_us;
            out.extend(self.emit_frame()?);
        }
        let telemetry = self.state.telemetry();
        out.push(self.out(Payload::Telemetry(telemetry)));
        Ok(out)
    }

    fn emit_frame(&mut self) -> Result<Vec<Message>, DeviceError> {
        let seq = self.state.frame_seq;
        self.state.frame_seq = seq.wrapping_add(1);
        let frame = render_frame(
            &self.state.presses,
            &self.config.membrane,
            &self.baseline,
            derive_seed(self.seed, 2 * seq as u64 + 1),
        )?
        .with_meta(seq, self.state.time_us);
        let mut out: Vec<Message> = chunk_frame(seq, &encode_frame(&frame), FRAME_CHUNK_BYTES)
            .into_iter()
            .map(|c| self.out(Payload::FrameChunk(c)))
            .collect();
        let active = self.state.channels.iter().flatten().next().map(|c| c.params.clone());
        if let Some(params) = active {
            if let Some(patch) = self.perception.detect_contact(&frame, &self.reference)? {
                if let Ok(zone) = self.zones.classify(&patch) {
                    let p = perceive(&self.state.switches, &params, zone, &self.config.sensitivity);
                    out.push(self.out(Payload::PerceptEvent(PerceptEvent {
                        location: p.location,
                        intensity_score: p.intensity_score,
                        zone: p.zone,
                    })));
                }
            }
        }
        Ok(out)
    }
}
