use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use vet_core::apps::experiment::{run_zone_experiment, ZoneReport};
use vet_core::apps::flight::FlightState;
use vet_core::apps::session::{
    self, experiment_log, parse_ndjson, record_game, record_teleop, replay, to_ndjson, AppKind, Episode, SessionRecord,
};
use vet_core::apps::teleop::{compare_operators, TeleopState};
use vet_core::config::VetConfig;
use vet_core::rng::derive_seed;
use vet_core::sim::{render_frame, PressEvent, Scenario, TimedPress};
use vet_core::stim::StimParams;
use vet_core::tactile::fixture::encode_frame;
use vet_core::tactile::{Perception, ZoneMap};
use vet_gateway::{gateway_addr, serve_device, serve_gateway, DeviceServerOptions, LinkOptions};

use crate::manifest::OutputDir;
use crate::{Cli, Command};

const DEFAULT_OUT: &str = "out";

pub fn run(cli: &Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => VetConfig::load(path)?,
        None => VetConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = || cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    match &cli.command {
        Command::Simulate { scenario } => simulate(&config, cli.seed, scenario.as_deref(), &out()),
        Command::Experiment { trials } => {
            if let Some(n) = trials {
                config.experiment.trials_per_zone = *n;
            }
            config.validate()?;
            experiment(&config, &out())
        }
        Command::Game { duration } => {
            if let Some(d) = duration {
                config.flight.duration_s = *d;
            }
            config.validate()?;
            game(&config, &out())
        }
        Command::Teleop { objects } => teleop(&config, *objects, &out()),
        Command::Serve { port, device } => serve(&config, *port, device.clone()),
        Command::Replay { log } => replay_log(log, cli.out.as_deref()),
        Command::Export { log } => export(log, &out()),
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Serde name of an enum value, as it appears in JSON.
fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One press sliding right across the sensor, then a still press in a corner.
fn demo_scenario(config: &VetConfig, seed: u64) -> Scenario {
    let (w, h) = (config.sensor.width, config.sensor.height);
    let dt = config.sensor.frame_interval_us;
    let mut slide = PressEvent::new((w as f64 * 0.3, h as f64 * 0.5), 5.0, 1.5);
    slide.velocity = (1.0, 0.0);
    Scenario {
        width: w,
        height: h,
        frames: 45,
        frame_interval_us: dt,
        seed,
        membrane: config.membrane.clone(),
        load: config.load,
        presses: vec![
            TimedPress {
                start_us: 5 * dt,
                end_us: 25 * dt,
                press: slide,
            },
            TimedPress {
                start_us: 30 * dt,
                end_us: 40 * dt,
                press: PressEvent::new((w as f64 * 0.7, h as f64 * 0.3), 4.0, 2.0),
            },
        ],
    }
}

fn simulate(config: &VetConfig, seed_flag: Option<u64>, scenario_path: Option<&Path>, out: &Path) -> Result<()> {
    let scenario = match scenario_path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let mut s = Scenario::from_json(&text)?;
            if let Some(seed) = seed_flag {
                s.seed = seed;
            }
            s
        }
        None => demo_scenario(config, config.seed),
    };
    let frames = scenario.render_stream()?;
    let perception = Perception::new(config.perception.clone());
    let baseline = scenario.baseline();
    let reference_frames = (0..8)
        .map(|i| {
            render_frame(
                &[],
                &scenario.membrane,
                &baseline,
                derive_seed(scenario.seed, (1 << 32) + i),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let reference = perception.set_reference(&reference_frames)?;
    let zones = ZoneMap::default_layout(scenario.width, scenario.height);

    let mut rows = Vec::new();
    let mut prev: Option<(usize, bool)> = None;
    for (i, frame) in frames.iter().enumerate() {
        let patch = perception.detect_contact(frame, &reference)?;
        let flow = match (prev, &patch) {
            (Some((p, true)), Some(_)) => Some(perception.estimate_flow(&frames[p], frame, &reference)?.mean_flow),
            _ => None,
        };
        let row = match &patch {
            Some(c) => vec![
                i.to_string(),
                frame.timestamp_us.to_string(),
                "1".into(),
                c.area.to_string(),
                c.centroid.0.to_string(),
                c.centroid.1.to_string(),
                c.depth.max_depth.to_string(),
                c.force.normal.to_string(),
                opt(flow.map(|f| f.0)),
                opt(flow.map(|f| f.1)),
                zones.classify(c).map(|z| z.name().to_string()).unwrap_or_default(),
            ],
            None => {
                let mut r = vec![i.to_string(), frame.timestamp_us.to_string(), "0".into()];
                r.resize(11, String::new());
                r
            }
        };
        rows.push(row);
        prev = Some((i, patch.is_some()));
    }
    let table = csv_string(
        &[
            "frame",
            "timestamp_us",
            "contact",
            "area",
            "centroid_x",
            "centroid_y",
            "max_depth_mm",
            "normal_force",
            "flow_x",
            "flow_y",
            "zone",
        ],
        rows,
    )?;
    let mut dir = OutputDir::create(out)?;
    dir.write("scenario.json", scenario.to_json() + "\n")?;
    dir.write("frames.bin", frames.iter().flat_map(encode_frame).collect::<Vec<u8>>())?;
    dir.write("perception.csv", table)?;
    let hashed = format!("{}\n{}", config.to_json(), scenario.to_json());
    dir.finish("simulate", scenario.seed, &hashed)?;
    println!("simulate: {} frames -> {}", frames.len(), out.display());
    Ok(())
}

fn experiment(config: &VetConfig, out: &Path) -> Result<()> {
    let report = run_zone_experiment(&config.experiment, &config.device(), config.seed)?;
    let mut dir = OutputDir::create(out)?;
    dir.write("trials.csv", report.trials_csv()?)?;
    dir.write("boxplot.csv", report.boxplot_csv()?)?;
    dir.write(
        "session.ndjson",
        to_ndjson(&experiment_log(config, config.seed, &report)),
    )?;
    dir.finish("experiment", config.seed, &config.to_json())?;
    println!("experiment: {} trials -> {}", report.trials.len(), out.display());
    Ok(())
}

fn last_state<T: serde::de::DeserializeOwned>(records: &[SessionRecord]) -> Result<Option<T>> {
    records
        .iter()
        .rev()
        .find(|r| r.kind == "state")
        .map(|r| serde_json::from_value(r.payload.clone()))
        .transpose()
        .map_err(Into::into)
}

fn game(config: &VetConfig, out: &Path) -> Result<()> {
    let records = record_game(config, config.seed)?;
    let state: Option<FlightState> = last_state(&records)?;
    let commands = records.iter().filter(|r| r.kind == "command").count();
    let ticks = records.iter().filter(|r| r.kind == "input").count();
    let summary = json!({
        "seed": config.seed,
        "ticks": ticks,
        "commands": commands,
        "cargo_collected": state.as_ref().map(|s| s.cargo_collected),
        "final_state": state,
    });
    let mut dir = OutputDir::create(out)?;
    dir.write("session.ndjson", to_ndjson(&records))?;
    dir.write("summary.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    dir.finish("game", config.seed, &config.to_json())?;
    println!(
        "game: {ticks} ticks, {} cargo, {commands} commands -> {}",
        state.map_or(0, |s| s.cargo_collected),
        out.display()
    );
    Ok(())
}

fn teleop(config: &VetConfig, objects: usize, out: &Path) -> Result<()> {
    if objects == 0 {
        bail!("--objects must be at least 1");
    }
    let pairs = compare_operators(&config.teleop, objects, config.seed)?;
    let mut rows = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        for o in [&p.band_following, &p.open_loop] {
            rows.push(vec![
                i.to_string(),
                tag(&o.operator),
                o.object.stiffness.to_string(),
                o.object.size_mm.to_string(),
                o.object.crush_limit.to_string(),
                o.crushed.to_string(),
                o.slipped.to_string(),
                o.final_grip.to_string(),
                o.peak_grip.to_string(),
                opt(o.final_feedback_hz),
                opt(o.settle_s),
                o.commands.to_string(),
            ]);
        }
    }
    let table = csv_string(
        &[
            "object",
            "operator",
            "stiffness",
            "size_mm",
            "crush_limit",
            "crushed",
            "slipped",
            "final_grip",
            "peak_grip",
            "final_feedback_hz",
            "settle_s",
            "commands",
        ],
        rows,
    )?;
    let count = |f: fn(&vet_core::apps::teleop::PairedOutcome) -> bool| pairs.iter().filter(|p| f(p)).count();
    let summary = json!({
        "seed": config.seed,
        "objects": objects,
        "crushed": {
            "band_following": count(|p| p.band_following.crushed),
            "open_loop": count(|p| p.open_loop.crushed),
        },
        "slipped": {
            "band_following": count(|p| p.band_following.slipped),
            "open_loop": count(|p| p.open_loop.slipped),
        },
    });
    let mut dir = OutputDir::create(out)?;
    dir.write("teleop.csv", table)?;
    dir.write(
        "session.ndjson",
        to_ndjson(&record_teleop(config, config.seed, objects)?),
    )?;
    dir.write("summary.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    dir.finish("teleop", config.seed, &config.to_json())?;
    println!("teleop: {objects} objects -> {}", out.display());
    Ok(())
}

fn serve(config: &VetConfig, port: u16, device: Option<String>) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let gateway_listener = tokio::net::TcpListener::bind(gateway_addr())
            .await
            .with_context(|| format!("binding gateway on {}", gateway_addr()))?;
        let gateway_local = gateway_listener.local_addr()?;
        let device_addr = match device {
            Some(addr) => addr,
            None => {
                let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
                    .await
                    .with_context(|| format!("binding device on port {port}"))?;
                let addr = listener.local_addr()?.to_string();
                let (device_config, seed) = (config.device(), config.seed);
                tokio::spawn(async move {
                    if let Err(e) = serve_device(listener, device_config, seed, DeviceServerOptions::default()).await {
                        eprintln!("device server stopped: {e}");
                    }
                });
                eprintln!("device listening on {addr}");
                addr
            }
        };
        eprintln!("gateway on ws://{gateway_local}/ws (schema at http://{gateway_local}/schema)");
        tokio::select! {
            r = serve_gateway(gateway_listener, device_addr, LinkOptions::default()) => r.context("gateway stopped")?,
            _ = tokio::signal::ctrl_c() => eprintln!("shutting down"),
        }
        Ok(())
    })
}

fn read_log(log: &Path) -> Result<Vec<SessionRecord>> {
    let text = fs::read_to_string(log).with_context(|| format!("reading {}", log.display()))?;
    parse_ndjson(&text).with_context(|| format!("parsing {}", log.display()))
}

fn replay_log(log: &Path, out: Option<&Path>) -> Result<()> {
    let records = read_log(log)?;
    let summary = replay(&records).with_context(|| format!("replaying {}", log.display()))?;
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    print!("{text}");
    if let Some(out) = out {
        let header = session::header(&records)?;
        let mut dir = OutputDir::create(out)?;
        dir.write("replay_summary.json", &text)?;
        let (seed, config) = header.map_or((0, String::new()), |h| (h.seed, h.config.to_json()));
        dir.finish("replay", seed, &config)?;
    }
    Ok(())
}

fn export(log: &Path, out: &Path) -> Result<()> {
    let records = read_log(log)?;
    let Some(header) = session::header(&records)? else {
        bail!("{} is empty", log.display());
    };
    let mut dir = OutputDir::create(out)?;
    match header.app {
        AppKind::Experiment => {
            let report = ZoneReport::from_trials(session::trials(&records)?);
            dir.write("trials.csv", report.trials_csv()?)?;
            dir.write("boxplot.csv", report.boxplot_csv()?)?;
        }
        AppKind::Game => {
            dir.write("flight.csv", flight_table(&records)?)?;
        }
        AppKind::Teleop => {
            dir.write("teleop_ticks.csv", teleop_table(&records)?)?;
        }
    }
    dir.finish("export", header.seed, &header.config.to_json())?;
    println!("export: {} records -> {}", records.len(), out.display());
    Ok(())
}

fn command_cells(c: Option<&StimParams>) -> [String; 2] {
    match c {
        Some(c) => [c.frequency_hz.to_string(), c.amplitude_ma.to_string()],
        None => [String::new(), String::new()],
    }
}

fn flight_table(records: &[SessionRecord]) -> Result<String> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    for r in records {
        match r.kind.as_str() {
            "state" => {
                let s: FlightState = serde_json::from_value(r.payload.clone())?;
                let mut row = vec![
                    r.t_us.to_string(),
                    s.position.0.to_string(),
                    s.position.1.to_string(),
                    s.velocity.0.to_string(),
                    s.velocity.1.to_string(),
                    tag(&s.zone_under),
                    s.cargo_collected.to_string(),
                    s.collided.to_string(),
                ];
                row.extend(command_cells(None));
                rows.push(row);
            }
            "command" => {
                let c: StimParams = serde_json::from_value(r.payload.clone())?;
                if let Some(row) = rows.last_mut() {
                    let [f, a] = command_cells(Some(&c));
                    row[8] = f;
                    row[9] = a;
                }
            }
            _ => {}
        }
    }
    csv_string(
        &[
            "t_us",
            "x",
            "y",
            "vx",
            "vy",
            "zone",
            "cargo_collected",
            "collided",
            "command_hz",
            "command_ma",
        ],
        rows,
    )
}

fn teleop_table(records: &[SessionRecord]) -> Result<String> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut episode: Option<(usize, Episode)> = None;
    for r in records {
        match r.kind.as_str() {
            "episode" => {
                let e: Episode = serde_json::from_value(r.payload.clone())?;
                episode = Some((episode.map_or(0, |(i, _)| i + 1), e));
            }
            "state" => {
                let Some((i, e)) = &episode else {
                    bail!("state before any episode");
                };
                let s: TeleopState = serde_json::from_value(r.payload.clone())?;
                rows.push(vec![
                    i.to_string(),
                    tag(&e.operator),
                    r.t_us.to_string(),
                    s.aperture_mm.to_string(),
                    s.grip_force.to_string(),
                    s.lifting.to_string(),
                    s.slip.to_string(),
                    s.crushed.to_string(),
                    String::new(),
                ]);
            }
            "command" => {
                let c: StimParams = serde_json::from_value(r.payload.clone())?;
                if let Some(row) = rows.last_mut() {
                    row[8] = c.frequency_hz.to_string();
                }
            }
            _ => {}
        }
    }
    csv_string(
        &[
            "episode",
            "operator",
            "t_us",
            "aperture_mm",
            "grip_force",
            "lifting",
            "slip",
            "crushed",
            "feedback_hz",
        ],
        rows,
    )
}
