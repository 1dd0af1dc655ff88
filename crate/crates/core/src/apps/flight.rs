//! Flight game: the pilot steers a craft by shearing a finger on the sensor.
//! Ice and fire cells, rocks and collisions are signalled back through the
//! stimulator.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AppError;
use crate::device::DeviceConfig;
use crate::grid::Grid;
use crate::rng::{derive_seed, rng_from};
use crate::sim::{default_baseline, render_frame, PressEvent};
use crate::stim::{Channel, Polarity, StimParams, DEFAULT_PULSE_WIDTH_US};
use crate::tactile::{CalibrationCurve, FlowField, Perception, ReferenceModel, TactileFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terrain {
    #[default]
    None,
    Ice,
    Fire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlightConfig {
    pub world_width: usize,
    pub world_height: usize,
    pub ice_fraction: f64,
    pub fire_fraction: f64,
    pub rock_fraction: f64,
    pub cargo_count: usize,
    pub start: (f64, f64),
    /// Acceleration per pixel of mean flow, cells/s^2.
    pub gain: f64,
    /// Exponential velocity decay rate, 1/s.
    pub drag_per_s: f64,
    pub v_max: f64,
    pub tick_s: f64,
    pub duration_s: f64,
    pub electrodes: BTreeSet<u16>,
    pub ice_hz: f64,
    pub fire_hz: f64,
    /// Low and high current tiers, mA.
    pub low_tier_ma: f64,
    pub high_tier_ma: f64,
    pub collision_hz: f64,
    pub collision_ma: f64,
    pub collision_ms: u32,
    pub rhythm_hz: f64,
    pub rhythm_ma: f64,
    /// Contact held this long counts as sustained.
    pub sustained_after_s: f64,
    pub burst_ms: u32,
    pub burst_period_ms: u32,
    /// Zone cues are re-issued with this duration while they persist.
    pub cue_ms: u32,
}

impl Default for FlightConfig {
    fn default() -> Self {
        Self {
            world_width: 32,
            world_height: 24,
            ice_fraction: 0.15,
            fire_fraction: 0.08,
            rock_fraction: 0.05,
            cargo_count: 6,
            start: (1.5, 1.5),
            gain: 1.5,
            drag_per_s: 0.5,
            v_max: 5.0,
            tick_s: 1.0 / 30.0,
            duration_s: 60.0,
            electrodes: BTreeSet::from([5, 6, 9, 10]),
            ice_hz: 10.0,
            fire_hz: 50.0,
            low_tier_ma: 1.0,
            high_tier_ma: 3.0,
            collision_hz: 100.0,
            collision_ma: 4.0,
            collision_ms: 150,
            rhythm_hz: 30.0,
            rhythm_ma: 1.5,
            sustained_after_s: 0.5,
            burst_ms: 100,
            burst_period_ms: 500,
            cue_ms: 1000,
        }
    }
}

impl FlightConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |m: &str| Err(AppError::Config(m.to_string()));
        if self.world_width < 2 || self.world_height < 2 {
            return bad("world must be at least 2x2 cells");
        }
        if !(self.tick_s > 0.0) || !(self.duration_s >= 0.0) {
            return bad("tick_s must be positive and duration_s non-negative");
        }
        if !(self.v_max > 0.0) || !(self.drag_per_s >= 0.0) {
            return bad("v_max must be positive and drag non-negative");
        }
        if self.electrodes.is_empty() {
            return bad("feedback electrodes must not be empty");
        }
        let (x, y) = self.start;
        if !(x >= 0.0 && y >= 0.0 && x < self.world_width as f64 && y < self.world_height as f64) {
            return bad("start lies outside the world");
        }
        Ok(())
    }
}

/// Grid world in cell units: terrain, rocks and cargo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub terrain: Grid<Terrain>,
    pub rocks: Grid<bool>,
    pub cargo: Vec<(usize, usize)>,
}

impl World {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            terrain: Grid::filled(width, height, Terrain::None),
            rocks: Grid::filled(width, height, false),
            cargo: Vec::new(),
        }
    }

    /// Seeded world. The start cell and its neighbours are kept clear.
    pub fn generate(cfg: &FlightConfig, seed: u64) -> Self {
        let (w, h) = (cfg.world_width, cfg.world_height);
        let mut world = Self::empty(w, h);
        let mut rng = rng_from(derive_seed(seed, 0x5EED));
        let (sx, sy) = (cfg.start.0 as i64, cfg.start.1 as i64);
        let near_start = |x: usize, y: usize| (x as i64 - sx).abs() <= 1 && (y as i64 - sy).abs() <= 1;
        for y in 0..h {
            for x in 0..w {
                let r: f64 = rng.random();
                if near_start(x, y) {
                    continue;
                }
                if r < cfg.rock_fraction {
                    world.rocks.set(x, y, true);
                } else if r < cfg.rock_fraction + cfg.fire_fraction {
                    world.terrain.set(x, y, Terrain::Fire);
                } else if r < cfg.rock_fraction + cfg.fire_fraction + cfg.ice_fraction {
                    world.terrain.set(x, y, Terrain::Ice);
                }
            }
        }
        let free = (0..w * h)
            .filter(|&i| !world.rocks.as_slice()[i] && !near_start(i % w, i / w))
            .count();
        let wanted = cfg.cargo_count.min(free);
        while world.cargo.len() < wanted {
            let c = (rng.random_range(0..w), rng.random_range(0..h));
            if !*world.rocks.get(c.0, c.1) && !near_start(c.0, c.1) && !world.cargo.contains(&c) {
                world.cargo.push(c);
            }
        }
        world
    }

    pub fn dims(&self) -> (usize, usize) {
        self.terrain.dims()
    }

    fn cell(&self, p: (f64, f64)) -> (usize, usize) {
        let (w, h) = self.dims();
        ((p.0.max(0.0) as usize).min(w - 1), (p.1.max(0.0) as usize).min(h - 1))
    }

    pub fn terrain_at(&self, p: (f64, f64)) -> Terrain {
        let (x, y) = self.cell(p);
        *self.terrain.get(x, y)
    }

    pub fn rock_at(&self, p: (f64, f64)) -> bool {
        let (x, y) = self.cell(p);
        *self.rocks.get(x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightState {
    pub position: (f64, f64),
    pub velocity: (f64, f64),
    pub zone_under: Terrain,
    pub cargo_collected: usize,
    /// Collision on the last step.
    pub collided: bool,
    pub cargo_taken: Vec<bool>,
    pub time_s: f64,
    /// How long the finger has been on the sensor without lifting.
    pub contact_s: f64,
    pub last_collision_s: Option<f64>,
}

impl FlightState {
    pub fn start(cfg: &FlightConfig, world: &World) -> Self {
        Self {
            position: cfg.start,
            velocity: (0.0, 0.0),
            zone_under: world.terrain_at(cfg.start),
            cargo_collected: 0,
            collided: false,
            cargo_taken: vec![false; world.cargo.len()],
            time_s: 0.0,
            contact_s: 0.0,
            last_collision_s: None,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.0.hypot(self.velocity.1)
    }
}

/// Advances the craft by `dt_s`. Flow x drives lateral and flow y
/// longitudinal acceleration; rocks and the world edge stop the craft.
pub fn step_flight(
    cfg: &FlightConfig,
    world: &World,
    state: &FlightState,
    flow: &FlowField,
    contact: bool,
    dt_s: f64,
) -> FlightState {
    let mut s = state.clone();
    s.collided = false;
    if !(dt_s > 0.0) {
        return s;
    }
    s.time_s += dt_s;
    s.contact_s = if contact { s.contact_s + dt_s } else { 0.0 };

    let decay = (-cfg.drag_per_s * dt_s).exp();
    let mut v = (
        (s.velocity.0 + cfg.gain * flow.mean_flow.0 * dt_s) * decay,
        (s.velocity.1 + cfg.gain * flow.mean_flow.1 * dt_s) * decay,
    );
    let speed = v.0.hypot(v.1);
    if speed > cfg.v_max {
        v = (v.0 * cfg.v_max / speed, v.1 * cfg.v_max / speed);
    }
    s.velocity = v;

    let (w, h) = world.dims();
    let travel = v.0.hypot(v.1) * dt_s;
    let steps = ((travel / 0.25).ceil() as usize).max(1);
    let sub = dt_s / steps as f64;
    for _ in 0..steps {
        let mut next = (s.position.0 + s.velocity.0 * sub, s.position.1 + s.velocity.1 * sub);
        let max = (w as f64 - 1e-9, h as f64 - 1e-9);
        for (axis, limit) in [(0, max.0), (1, max.1)] {
            let c = if axis == 0 { &mut next.0 } else { &mut next.1 };
            if *c < 0.0 || *c > limit {
                *c = c.clamp(0.0, limit);
                s.collided = true;
                if axis == 0 {
                    s.velocity.0 = 0.0;
                } else {
                    s.velocity.1 = 0.0;
                }
            }
        }
        if world.rock_at(next) {
            s.collided = true;
            s.velocity = (0.0, 0.0);
            break;
        }
        s.position = next;
        let cell = world.cell(s.position);
        for (i, &c) in world.cargo.iter().enumerate() {
            if c == cell && !s.cargo_taken[i] {
                s.cargo_taken[i] = true;
                s.cargo_collected += 1;
            }
        }
    }
    if s.collided {
        s.last_collision_s = Some(s.time_s);
    }
    s.zone_under = world.terrain_at(s.position);
    s
}

fn cue(cfg: &FlightConfig, frequency_hz: f64, amplitude_ma: f64, duration_ms: u32) -> StimParams {
    StimParams {
        channel: Channel::Ac1,
        frequency_hz,
        amplitude_ma,
        polarity: Polarity::Alternating,
        pulse_width_us: DEFAULT_PULSE_WIDTH_US,
        duration_ms,
        electrodes: cfg.electrodes.clone(),
    }
}

/// Stimulation the current state calls for, by priority: a recent
/// collision, fire, ice, then the rhythmic sustained-contact pattern.
pub fn hazard_feedback(cfg: &FlightConfig, state: &FlightState) -> Option<StimParams> {
    if let Some(t) = state.last_collision_s {
        if state.time_s - t < cfg.collision_ms as f64 / 1000.0 {
            return Some(cue(cfg, cfg.collision_hz, cfg.collision_ma, cfg.collision_ms));
        }
    }
    match state.zone_under {
        Terrain::Fire => return Some(cue(cfg, cfg.fire_hz, cfg.high_tier_ma, cfg.cue_ms)),
        Terrain::Ice => return Some(cue(cfg, cfg.ice_hz, cfg.low_tier_ma, cfg.cue_ms)),
        Terrain::None => {}
    }
    if state.contact_s >= cfg.sustained_after_s {
        let period = cfg.burst_period_ms as f64 / 1000.0;
        let phase = (state.contact_s - cfg.sustained_after_s) % period;
        if phase < cfg.burst_ms as f64 / 1000.0 {
            return Some(cue(cfg, cfg.rhythm_hz, cfg.rhythm_ma, cfg.burst_ms));
        }
    }
    None
}

/// Turns the desired cue stream into device commands: a cue is sent when it
/// changes or half its duration has passed, and a stop when cues end.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeedbackScheduler {
    last: Option<(StimParams, f64)>,
}

impl FeedbackScheduler {
    pub fn update(&mut self, now_s: f64, desired: Option<StimParams>) -> Option<StimParams> {
        match desired {
            Some(c) => {
                if let Some((l, t)) = &self.last {
                    if *l == c && now_s - t < c.duration_ms as f64 / 2000.0 {
                        return None;
                    }
                }
                self.last = Some((c.clone(), now_s));
                Some(c)
            }
            None => self.last.take().map(|(l, _)| StimParams {
                amplitude_ma: 0.0,
                duration_ms: 0,
                electrodes: BTreeSet::new(),
                ..l
            }),
        }
    }
}

/// Finger input for one tick.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PilotInput {
    pub presses: Vec<PressEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTick {
    pub state: FlightState,
    pub mean_flow: (f64, f64),
    pub command: Option<StimParams>,
}

/// Full game loop: render the pilot's finger, estimate shear flow against
/// the frame where contact began, fly, and schedule feedback.
pub struct GameSession {
    cfg: FlightConfig,
    device: DeviceConfig,
    seed: u64,
    world: World,
    state: FlightState,
    perception: Perception,
    reference: ReferenceModel,
    anchor: Option<TactileFrame>,
    scheduler: FeedbackScheduler,
    tick: u64,
}

impl GameSession {
    pub fn new(cfg: &FlightConfig, device: &DeviceConfig, seed: u64) -> Result<Self, AppError> {
        cfg.validate()?;
        let world = World::generate(cfg, seed);
        Self::with_world(cfg, device, world, seed)
    }

    pub fn with_world(cfg: &FlightConfig, device: &DeviceConfig, world: World, seed: u64) -> Result<Self, AppError> {
        cfg.validate()?;
        let (w, h) = (device.sensor.width, device.sensor.height);
        let reference = ReferenceModel {
            baseline: default_baseline(w, h),
            noise_sigma: device.membrane.noise_sigma,
            calib: Some(CalibrationCurve::new(device.perception.calib_knots.clone())?),
        };
        Ok(Self {
            state: FlightState::start(cfg, &world),
            cfg: cfg.clone(),
            device: device.clone(),
            seed,
            world,
            perception: Perception::new(device.perception.clone()),
            reference,
            anchor: None,
            scheduler: FeedbackScheduler::default(),
            tick: 0,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn state(&self) -> &FlightState {
        &self.state
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    pub fn total_ticks(&self) -> u64 {
        (self.cfg.duration_s / self.cfg.tick_s).round() as u64
    }

    pub fn step(&mut self, input: &PilotInput) -> Result<GameTick, AppError> {
        let frame = render_frame(
            &input.presses,
            &self.device.membrane,
            &self.reference.baseline,
            derive_seed(self.seed, self.tick),
        )?
        .with_meta(
            self.tick as u32,
            (self.tick as f64 * self.cfg.tick_s * 1e6).round() as u64,
        );
        self.tick += 1;
        let contact = self.perception.detect_contact(&frame, &self.reference)?.is_some();
        let flow = match (&self.anchor, contact) {
            (Some(anchor), true) => self.perception.estimate_flow(anchor, &frame, &self.reference)?,
            _ => FlowField::empty(self.device.perception.block_size, frame.width(), frame.height()),
        };
        if !contact {
            self.anchor = None;
        } else if self.anchor.is_none() {
            self.anchor = Some(frame);
        }
        self.state = step_flight(&self.cfg, &self.world, &self.state, &flow, contact, self.cfg.tick_s);
        let desired = hazard_feedback(&self.cfg, &self.state);
        let command = self.scheduler.update(self.state.time_s, desired);
        Ok(GameTick {
            state: self.state.clone(),
            mean_flow: flow.mean_flow,
            command,
        })
    }
}

/// Scripted pilot: heads for the nearest remaining cargo by shearing the
/// finger toward it, lifting briefly every few seconds.
#[derive(Debug, Clone)]
pub struct Autopilot {
    pub rest: (f64, f64),
    pub radius: f64,
    pub depth_mm: f64,
    pub max_offset_px: f64,
    pub lift_every_s: f64,
    pub lift_for_s: f64,
    pub cruise: f64,
}

impl Autopilot {
    pub fn for_sensor(width: usize, height: usize) -> Self {
        Self {
            rest: ((width / 2) as f64, (height / 2) as f64),
            radius: 5.0,
            depth_mm: 1.5,
            max_offset_px: 4.0,
            lift_every_s: 8.0,
            lift_for_s: 0.3,
            cruise: 2.0,
        }
    }

    pub fn input(&self, world: &World, state: &FlightState, prev: &PilotInput) -> PilotInput {
        if state.time_s % self.lift_every_s < self.lift_for_s {
            return PilotInput::default();
        }
        let center = if prev.presses.is_empty() {
            self.rest
        } else {
            let (dx, dy) = match next_waypoint(world, state) {
                Some(t) => {
                    let (ex, ey) = (t.0 - state.position.0, t.1 - state.position.1);
                    let d = ex.hypot(ey).max(1e-9);
                    let speed = self.cruise.min(2.0 * d);
                    let want = (ex / d * speed, ey / d * speed);
                    (want.0 - state.velocity.0, want.1 - state.velocity.1)
                }
                None => (-state.velocity.0, -state.velocity.1),
            };
            let m = self.max_offset_px;
            (
                self.rest.0 + (2.0 * dx).clamp(-m, m).round(),
                self.rest.1 + (2.0 * dy).clamp(-m, m).round(),
            )
        };
        PilotInput {
            presses: vec![PressEvent::new(center, self.radius, self.depth_mm)],
        }
    }
}

/// Centre of the next cell on a shortest 4-connected rock-free route to the
/// nearest untaken cargo.
fn next_waypoint(world: &World, state: &FlightState) -> Option<(f64, f64)> {
    let (w, h) = world.dims();
    let start = world.cell(state.position);
    let goal = |c: (usize, usize)| {
        world
            .cargo
            .iter()
            .zip(&state.cargo_taken)
            .any(|(&g, &taken)| !taken && g == c)
    };
    let mut parent: Grid<Option<(usize, usize)>> = Grid::filled(w, h, None);
    parent.set(start.0, start.1, Some(start));
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        if goal(c) {
            let mut step = c;
            while let Some(p) = *parent.get(step.0, step.1) {
                if p == start {
                    break;
                }
                step = p;
            }
            return Some((step.0 as f64 + 0.5, step.1 as f64 + 0.5));
        }
        let (x, y) = (c.0 as i64, c.1 as i64);
        for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let n = (nx as usize, ny as usize);
            if parent.get(n.0, n.1).is_none() && !*world.rocks.get(n.0, n.1) {
                parent.set(n.0, n.1, Some(c));
                queue.push_back(n);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stim::{clamp_safety, SafetyLimits};

    fn flow(dx: f64, dy: f64) -> FlowField {
        FlowField::from_mean((dx, dy), 1.0)
    }

    fn open_world() -> World {
        World::empty(32, 24)
    }

    #[test]
    fn at_rest_stays_put() {
        let cfg = FlightConfig::default();
        let w = open_world();
        let s0 = FlightState::start(&cfg, &w);
        let s1 = step_flight(&cfg, &w, &s0, &flow(0.0, 0.0), false, 0.1);
        assert_eq!(s1.position, s0.position);
    }

    #[test]
    fn constant_flow_moves_along_x_only() {
        let cfg = FlightConfig::default();
        let w = open_world();
        let mut s = FlightState::start(&cfg, &w);
        for _ in 0..60 {
            let n = step_flight(&cfg, &w, &s, &flow(1.0, 0.0), true, 1.0 / 30.0);
            assert!(n.position.0 > s.position.0);
            assert_eq!(n.position.1, s.position.1);
            s = n;
        }
    }

    #[test]
    fn drag_never_adds_energy() {
        let cfg = FlightConfig::default();
        let w = open_world();
        let mut s = FlightState::start(&cfg, &w);
        s.position = (16.0, 12.0);
        s.velocity = (3.0, -2.0);
        for _ in 0..100 {
            let n = step_flight(&cfg, &w, &s, &flow(0.0, 0.0), false, 0.05);
            assert!(n.speed() <= s.speed());
            s = n;
        }
    }

    #[test]
    fn rock_stops_the_craft() {
        let cfg = FlightConfig::default();
        let mut w = open_world();
        w.rocks.set(3, 1, true);
        let mut s = FlightState::start(&cfg, &w);
        s.velocity = (4.0, 0.0);
        let n = step_flight(&cfg, &w, &s, &flow(0.0, 0.0), false, 0.5);
        assert!(n.collided);
        assert_eq!(n.velocity, (0.0, 0.0));
        assert!(n.position.0 < 3.0);
        assert_eq!(n.last_collision_s, Some(n.time_s));
    }

    #[test]
    fn hazard_priorities() {
        let cfg = FlightConfig::default();
        let w = open_world();
        let mut s = FlightState::start(&cfg, &w);
        assert_eq!(hazard_feedback(&cfg, &s), None);
        s.zone_under = Terrain::Ice;
        assert_eq!(hazard_feedback(&cfg, &s).unwrap().frequency_hz, 10.0);
        s.zone_under = Terrain::Fire;
        let fire = hazard_feedback(&cfg, &s).unwrap();
        assert_eq!(fire.frequency_hz, 50.0);
        assert!(fire.amplitude_ma > cfg.low_tier_ma);
        s.last_collision_s = Some(s.time_s);
        assert_eq!(hazard_feedback(&cfg, &s).unwrap().amplitude_ma, cfg.collision_ma);
        s.zone_under = Terrain::None;
        s.last_collision_s = None;
        s.contact_s = 0.55;
        assert_eq!(hazard_feedback(&cfg, &s).unwrap().duration_ms, 100);
        s.contact_s = 0.75;
        assert_eq!(hazard_feedback(&cfg, &s), None);
    }

    #[test]
    fn every_cue_is_a_clamp_fixed_point() {
        let cfg = FlightConfig::default();
        let lim = SafetyLimits::default();
        for (hz, ma, ms) in [
            (cfg.ice_hz, cfg.low_tier_ma, cfg.cue_ms),
            (cfg.fire_hz, cfg.high_tier_ma, cfg.cue_ms),
            (cfg.collision_hz, cfg.collision_ma, cfg.collision_ms),
            (cfg.rhythm_hz, cfg.rhythm_ma, cfg.burst_ms),
        ] {
            let c = cue(&cfg, hz, ma, ms);
            let (out, report) = clamp_safety(&c, &lim);
            assert!(report.is_clean());
            assert_eq!(out, c);
        }
    }

    #[test]
    fn scheduler_sends_changes_refreshes_and_stops() {
        let cfg = FlightConfig::default();
        let ice = cue(&cfg, 10.0, 1.0, 1000);
        let mut sch = FeedbackScheduler::default();
        assert_eq!(sch.update(0.0, Some(ice.clone())), Some(ice.clone()));
        assert_eq!(sch.update(0.1, Some(ice.clone())), None);
        assert_eq!(sch.update(0.6, Some(ice.clone())), Some(ice.clone()));
        let stop = sch.update(0.7, None).unwrap();
        assert_eq!((stop.amplitude_ma, stop.duration_ms), (0.0, 0));
        stop.validate().unwrap();
        assert_eq!(sch.update(0.8, None), None);
    }

    #[test]
    fn generated_world_is_seeded() {
        let cfg = FlightConfig::default();
        assert_eq!(World::generate(&cfg, 4), World::generate(&cfg, 4));
        assert_ne!(World::generate(&cfg, 4), World::generate(&cfg, 5));
        let w = World::generate(&cfg, 4);
        assert_eq!(w.cargo.len(), cfg.cargo_count);
        assert!(!w.rock_at(cfg.start));
    }

    #[test]
    fn autopilot_session_collects_cargo() {
        let cfg = FlightConfig {
            duration_s: 20.0,
            ..FlightConfig::default()
        };
        let dev = DeviceConfig::default();
        let mut g = GameSession::new(&cfg, &dev, 7).unwrap();
        let pilot = Autopilot::for_sensor(dev.sensor.width, dev.sensor.height);
        let mut input = PilotInput::default();
        let mut moved = false;
        for _ in 0..g.total_ticks() {
            input = pilot.input(g.world(), g.state(), &input);
            let t = g.step(&input).unwrap();
            moved |= t.mean_flow != (0.0, 0.0);
        }
        assert!(moved);
        assert!(g.state().cargo_collected >= 1, "{:?}", g.state());
    }
}
