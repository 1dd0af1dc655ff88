//! Session logs: newline-delimited JSON records `{t_us, kind, payload}`.
//! The first record is a header naming the app, seed and full config;
//! replay re-runs the app from the logged inputs and checks every record.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::experiment::{run_zone_experiment, TrialRecord, ZoneReport};
use super::flight::{Autopilot, GameSession, GameTick, PilotInput};
use super::teleop::{operator_input, step_teleop, GraspObject, OperatorKind, TeleopInput, TeleopState};
use super::AppError;
use crate::config::VetConfig;
use crate::rng::rng_from;

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub t_us: u64,
    pub kind: String,
    pub payload: Value,
}

impl SessionRecord {
    pub fn new(t_us: u64, kind: &str, payload: impl Serialize) -> Self {
        Self {
            t_us,
            kind: kind.to_string(),
            payload: serde_json::to_value(payload).expect("payload serializes"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppKind {
    Experiment,
    Game,
    Teleop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub app: AppKind,
    pub seed: u64,
    pub config: VetConfig,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("log version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("record {index} is truncated")]
    Truncated { index: usize },
    #[error("record {index} is corrupted: {reason}")]
    Corrupted { index: usize, reason: String },
    #[error("record {index} differs on replay")]
    Divergence {
        index: usize,
        expected: Option<Box<SessionRecord>>,
        replayed: Option<Box<SessionRecord>>,
    },
    #[error(transparent)]
    App(#[from] AppError),
}

pub fn to_ndjson(records: &[SessionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Parses a log. A bad final line with no newline is reported as truncated,
/// anything else unparseable as corrupted.
pub fn parse_ndjson(text: &str) -> Result<Vec<SessionRecord>, ReplayError> {
    let mut out = Vec::new();
    let lines: Vec<&str> = text.split('\n').collect();
    let last = lines.len() - 1;
    for (index, line) in lines.iter().enumerate() {
        if index == last && line.is_empty() {
            break;
        }
        match serde_json::from_str::<SessionRecord>(line) {
            Ok(r) => out.push(r),
            Err(_) if index == last => return Err(ReplayError::Truncated { index }),
            Err(e) => {
                return Err(ReplayError::Corrupted {
                    index,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

fn header_record(app: AppKind, config: &VetConfig, seed: u64) -> SessionRecord {
    SessionRecord::new(
        0,
        "header",
        Header {
            version: LOG_VERSION,
            app,
            seed,
            config: config.clone(),
        },
    )
}

fn game_records(t_us: u64, input: &PilotInput, tick: &GameTick, out: &mut Vec<SessionRecord>) {
    out.push(SessionRecord::new(t_us, "input", input));
    out.push(SessionRecord::new(t_us, "state", &tick.state));
    if let Some(c) = &tick.command {
        out.push(SessionRecord::new(t_us, "command", c));
    }
}

fn tick_us(tick: u64, tick_s: f64) -> u64 {
    (tick as f64 * tick_s * 1e6).round() as u64
}

/// Plays a full game with the scripted pilot and returns its log.
pub fn record_game(config: &VetConfig, seed: u64) -> Result<Vec<SessionRecord>, AppError> {
    let device = config.device();
    let mut game = GameSession::new(&config.flight, &device, seed)?;
    let pilot = Autopilot::for_sensor(device.sensor.width, device.sensor.height);
    let mut records = vec![header_record(AppKind::Game, config, seed)];
    let mut input = PilotInput::default();
    for i in 0..game.total_ticks() {
        input = pilot.input(game.world(), game.state(), &input);
        let tick = game.step(&input)?;
        game_records(tick_us(i, config.flight.tick_s), &input, &tick, &mut records);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub operator: OperatorKind,
    pub object: GraspObject,
}

/// Band-following and open-loop operators on `objects` random objects.
pub fn record_teleop(config: &VetConfig, seed: u64, objects: usize) -> Result<Vec<SessionRecord>, AppError> {
    let cfg = &config.teleop;
    cfg.validate()?;
    let mut rng = rng_from(seed);
    let mut records = vec![header_record(AppKind::Teleop, config, seed)];
    let ticks = ((cfg.grasp_s + cfg.lift_s) / cfg.tick_s).round() as u64;
    let mut clock = 0u64;
    for _ in 0..objects {
        let object = GraspObject::random(&mut rng);
        for operator in [OperatorKind::BandFollowing, OperatorKind::OpenLoop] {
            records.push(SessionRecord::new(
                tick_us(clock, cfg.tick_s),
                "episode",
                Episode { operator, object },
            ));
            let mut s = TeleopState::new(cfg, object);
            let mut felt = None;
            for _ in 0..ticks {
                let input = operator_input(cfg, operator, &s, felt);
                let (next, cmd) = step_teleop(cfg, &s, input, cfg.tick_s);
                teleop_records(tick_us(clock, cfg.tick_s), &input, &next, cmd.as_ref(), &mut records);
                felt = cmd.map(|c| c.frequency_hz);
                s = next;
                clock += 1;
            }
        }
    }
    Ok(records)
}

fn teleop_records(
    t_us: u64,
    input: &TeleopInput,
    state: &TeleopState,
    cmd: Option<&crate::stim::StimParams>,
    out: &mut Vec<SessionRecord>,
) {
    out.push(SessionRecord::new(t_us, "input", input));
    out.push(SessionRecord::new(t_us, "state", state));
    if let Some(c) = cmd {
        out.push(SessionRecord::new(t_us, "command", c));
    }
}

pub fn record_experiment(config: &VetConfig, seed: u64) -> Result<Vec<SessionRecord>, AppError> {
    let report = run_zone_experiment(&config.experiment, &config.device(), seed)?;
    Ok(experiment_log(config, seed, &report))
}

/// Log of an experiment that has already been run with `config` and `seed`.
pub fn experiment_log(config: &VetConfig, seed: u64, report: &ZoneReport) -> Vec<SessionRecord> {
    let mut records = vec![header_record(AppKind::Experiment, config, seed)];
    records.extend(
        report
            .trials
            .iter()
            .map(|t| SessionRecord::new(t.contact_start_us, "trial", t)),
    );
    records
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub app: Option<AppKind>,
    pub seed: Option<u64>,
    pub records: usize,
    pub inputs: usize,
    /// Last `state` (or `trial`) payload reproduced by the replay.
    pub final_state: Option<Value>,
}

fn payload<T: serde::de::DeserializeOwned>(index: usize, r: &SessionRecord) -> Result<T, ReplayError> {
    serde_json::from_value(r.payload.clone()).map_err(|e| ReplayError::Corrupted {
        index,
        reason: format!("{} payload: {e}", r.kind),
    })
}

/// Re-runs a parsed log and checks that every record is reproduced exactly.
pub fn replay(records: &[SessionRecord]) -> Result<ReplaySummary, ReplayError> {
    let Some(first) = records.first() else {
        return Ok(ReplaySummary {
            app: None,
            seed: None,
            records: 0,
            inputs: 0,
            final_state: None,
        });
    };
    if first.kind != "header" {
        return Err(ReplayError::Corrupted {
            index: 0,
            reason: "first record is not a header".into(),
        });
    }
    if let Some(v) = first.payload.get("version").and_then(Value::as_u64) {
        if v != LOG_VERSION as u64 {
            return Err(ReplayError::VersionMismatch {
                found: v as u32,
                expected: LOG_VERSION,
            });
        }
    }
    let header: Header = payload(0, first)?;
    let config = &header.config;
    config.validate().map_err(|e| ReplayError::Corrupted {
        index: 0,
        reason: e.to_string(),
    })?;
    let inputs = records.iter().filter(|r| r.kind == "input").count();

    let mut replayed = vec![first.clone()];
    match header.app {
        AppKind::Game => {
            let mut game = GameSession::new(&config.flight, &config.device(), header.seed)?;
            for (index, r) in records.iter().enumerate().skip(1) {
                if r.kind == "input" {
                    let input: PilotInput = payload(index, r)?;
                    let tick = game.step(&input)?;
                    game_records(r.t_us, &input, &tick, &mut replayed);
                }
            }
        }
        AppKind::Teleop => {
            let cfg = &config.teleop;
            let mut state: Option<TeleopState> = None;
            for (index, r) in records.iter().enumerate().skip(1) {
                match r.kind.as_str() {
                    "episode" => {
                        let ep: Episode = payload(index, r)?;
                        replayed.push(r.clone());
                        state = Some(TeleopState::new(cfg, ep.object));
                    }
                    "input" => {
                        let input: TeleopInput = payload(index, r)?;
                        let s = state.as_ref().ok_or_else(|| ReplayError::Corrupted {
                            index,
                            reason: "input before any episode".into(),
                        })?;
                        let (next, cmd) = step_teleop(cfg, s, input, cfg.tick_s);
                        teleop_records(r.t_us, &input, &next, cmd.as_ref(), &mut replayed);
                        state = Some(next);
                    }
                    _ => {}
                }
            }
        }
        AppKind::Experiment => {
            replayed = record_experiment(config, header.seed)?;
        }
    }

    let n = records.len().max(replayed.len());
    for index in 0..n {
        let (a, b) = (records.get(index), replayed.get(index));
        if a != b {
            return Err(ReplayError::Divergence {
                index,
                expected: a.cloned().map(Box::new),
                replayed: b.cloned().map(Box::new),
            });
        }
    }
    let final_state = replayed
        .iter()
        .rev()
        .find(|r| r.kind == "state" || r.kind == "trial")
        .map(|r| r.payload.clone());
    Ok(ReplaySummary {
        app: Some(header.app),
        seed: Some(header.seed),
        records: records.len(),
        inputs,
        final_state,
    })
}

/// Trials logged by an experiment session.
pub fn trials(records: &[SessionRecord]) -> Result<Vec<TrialRecord>, ReplayError> {
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kind == "trial")
        .map(|(i, r)| payload(i, r))
        .collect()
}

/// Convenience for logs that only need the header.
pub fn header(records: &[SessionRecord]) -> Result<Option<Header>, ReplayError> {
    records.first().map(|r| payload(0, r)).transpose()
}

pub fn header_json(app: AppKind, config: &VetConfig, seed: u64) -> Value {
    json!(header_record(app, config, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_game() -> VetConfig {
        let mut c = VetConfig::default();
        c.flight.duration_s = 2.0;
        c
    }

    #[test]
    fn empty_log_replays_empty() {
        let r = replay(&parse_ndjson("").unwrap()).unwrap();
        assert_eq!(r.records, 0);
        assert_eq!(r.app, None);
    }

    #[test]
    fn game_round_trip_through_text() {
        let recs = record_game(&short_game(), 3).unwrap();
        let text = to_ndjson(&recs);
        let parsed = parse_ndjson(&text).unwrap();
        assert_eq!(parsed, recs);
        let s = replay(&parsed).unwrap();
        assert_eq!(s.app, Some(AppKind::Game));
        assert_eq!(s.inputs, 60);
    }

    #[test]
    fn teleop_round_trip() {
        let recs = record_teleop(&VetConfig::default(), 1, 2).unwrap();
        let parsed = parse_ndjson(&to_ndjson(&recs)).unwrap();
        replay(&parsed).unwrap();
    }

    #[test]
    fn truncation_and_corruption_are_located() {
        let text = to_ndjson(&record_game(&short_game(), 3).unwrap());
        let cut = &text[..text.len() - 20];
        let lines = cut.split('\n').count() - 1;
        assert!(matches!(parse_ndjson(cut), Err(ReplayError::Truncated { index }) if index == lines));
        let mut bad: Vec<&str> = text.lines().collect();
        bad[3] = "{not json";
        let joined = bad.join("\n") + "\n";
        assert!(matches!(
            parse_ndjson(&joined),
            Err(ReplayError::Corrupted { index: 3, .. })
        ));
    }

    #[test]
    fn tampering_is_detected() {
        let mut recs = record_game(&short_game(), 3).unwrap();
        let i = recs.iter().position(|r| r.kind == "state").unwrap();
        recs[i].payload["cargo_collected"] = json!(99);
        assert!(matches!(replay(&recs), Err(ReplayError::Divergence { index, .. }) if index == i));
    }

    #[test]
    fn version_mismatch() {
        let mut recs = record_game(&short_game(), 3).unwrap();
        recs[0].payload["version"] = json!(LOG_VERSION + 1);
        assert!(matches!(replay(&recs), Err(ReplayError::VersionMismatch { .. })));
    }
}
