use std::fs;

use vet_core::apps::experiment::run_zone_experiment;
use vet_core::apps::session::{
    parse_ndjson, record_experiment, record_game, record_teleop, replay, to_ndjson, AppKind, ReplayError,
};
use vet_core::config::{ConfigError, VetConfig};

fn small_config() -> VetConfig {
    let mut c = VetConfig::default();
    c.experiment.trials_per_zone = 2;
    c.flight.duration_s = 3.0;
    c
}

#[test]
fn logs_written_to_disk_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let logs = [
        (AppKind::Game, record_game(&config, 5).unwrap()),
        (AppKind::Teleop, record_teleop(&config, 5, 2).unwrap()),
        (AppKind::Experiment, record_experiment(&config, 5).unwrap()),
    ];
    for (kind, records) in logs {
        let path = dir.path().join(format!("{kind:?}.ndjson"));
        fs::write(&path, to_ndjson(&records)).unwrap();
        let parsed = parse_ndjson(&fs::read_to_string(&path).unwrap()).unwrap();
        let summary = replay(&parsed).unwrap();
        assert_eq!(summary.app, Some(kind));
        assert_eq!(summary.seed, Some(5));
        assert_eq!(summary.records, records.len());
    }
}

#[test]
fn replay_under_a_different_config_diverges() {
    let config = small_config();
    let mut records = record_game(&config, 5).unwrap();
    let mut other = config.clone();
    other.flight.gain *= 2.0;
    records[0].payload["config"] = serde_json::to_value(&other).unwrap();
    assert!(matches!(replay(&records), Err(ReplayError::Divergence { .. })));
}

#[test]
fn damaged_files_are_located() {
    let text = to_ndjson(&record_teleop(&small_config(), 1, 1).unwrap());
    assert!(parse_ndjson(&text[..text.len() - 1]).is_ok());
    assert!(matches!(
        parse_ndjson(&text[..text.len() - 3]),
        Err(ReplayError::Truncated { .. })
    ));
    let bad = text.replacen("\"input\"", "\"input", 1);
    assert!(matches!(parse_ndjson(&bad), Err(ReplayError::Corrupted { .. })));
    assert!(replay(&parse_ndjson("").unwrap()).unwrap().app.is_none());
}

#[test]
fn experiment_csv_files() {
    let config = small_config();
    let report = run_zone_experiment(&config.experiment, &config.device(), 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = report.write_csv(dir.path()).unwrap();
    assert_eq!(written.len(), 2);
    let trials = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(
        trials.lines().next().unwrap(),
        "zone,condition,trial,pressure,intensity_score"
    );
    assert_eq!(trials.lines().count(), 1 + 5 * 2 * 2);
    let boxplot = fs::read_to_string(dir.path().join("boxplot.csv")).unwrap();
    assert_eq!(
        boxplot.lines().next().unwrap(),
        "zone,condition,metric,n,min,q1,median,q3,max"
    );
}

#[test]
fn config_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vet.json");
    fs::write(&path, r#"{"seed": 9, "experiment": {"trials_per_zone": 3}}"#).unwrap();
    let c = VetConfig::load(&path).unwrap();
    assert_eq!(c.seed, 9);
    assert_eq!(c.experiment.trials_per_zone, 3);
    assert_eq!(VetConfig::from_json(&c.to_json()).unwrap(), c);

    fs::write(&path, r#"{"sead": 9}"#).unwrap();
    assert!(matches!(VetConfig::load(&path), Err(ConfigError::Parse(_))));
    fs::write(&path, r#"{"stim": {"max_amplitude_ma": 7}}"#).unwrap();
    assert!(matches!(VetConfig::load(&path), Err(ConfigError::Invalid(_))));
    assert!(matches!(
        VetConfig::load(&dir.path().join("missing.json")),
        Err(ConfigError::Read { .. })
    ));
}
