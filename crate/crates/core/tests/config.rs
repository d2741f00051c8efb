use std::path::Path;

use ibfsi_core::config::parse_config;
use ibfsi_core::scenario::preset;
use ibfsi_core::{load_config, Error, ScenarioKind};

fn parse(text: &str) -> ibfsi_core::Result<ibfsi_core::SimConfig> {
    parse_config(Path::new("test.cfg"), text)
}

#[test]
fn minimal_file_takes_preset_defaults() {
    let cfg = parse("[scenario]\nname = circle-cubic\n").unwrap();
    assert_eq!(cfg, preset(ScenarioKind::CircleCubic));
    cfg.validate().unwrap();
}

#[test]
fn every_preset_validates() {
    for kind in ScenarioKind::ALL {
        preset(kind).validate().unwrap();
    }
}

#[test]
fn negative_viscosity_is_rejected() {
    let err = parse("[scenario]\nname = heart\n[fluid]\nmu = -1\n").unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn swimmer_with_unordered_mediary_points_is_rejected() {
    let text = "[scenario]\nname = swimmer\np1 = 0.9\np2 = 0.3\n";
    assert!(parse(text).is_err());
    let text = "[scenario]\nname = swimmer\np1 = 0.5\np2 = 0.5\n";
    assert!(parse(text).is_err());
}

#[test]
fn parse_errors_carry_line_numbers() {
    let text = "[scenario]\nname = heart\n\n[domain]\nnx 32\n";
    match parse(text).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 5),
        e => panic!("unexpected {e}"),
    }
    let text = "# header\n[scenario]\nname = heart\n[fluid]\nrho = dense\n";
    match parse(text).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 5),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn missing_scenario_name_is_an_error() {
    assert!(parse("[domain]\nnx = 32\n").is_err());
}

#[test]
fn comments_and_unknown_keys_are_tolerated() {
    let text = "[scenario] # trailing\nname = swimmer # inline\n[fluid]\nmu = 50\ncolour = blue\n";
    let cfg = parse(text).unwrap();
    assert_eq!(cfg.mu, 50.0);
}

#[test]
fn overrides_replace_values() {
    let mut cfg = preset(ScenarioKind::Swimmer);
    cfg.apply_override("fluid.mu=500").unwrap();
    cfg.apply_override("scenario.p2 = 0.7").unwrap();
    assert_eq!(cfg.mu, 500.0);
    assert_eq!(cfg.p2, 0.7);
    assert!(cfg.apply_override("fluid.colour=blue").is_err());
    assert!(cfg.apply_override("mu=5").is_err());
    assert!(cfg.apply_override("scenario.name=heart").is_err());
}

#[test]
fn text_round_trip() {
    for kind in ScenarioKind::ALL {
        let mut cfg = preset(kind);
        cfg.mu = 0.123456789;
        let back = parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg, "{kind}");
    }
}

#[test]
fn relative_geometry_dir_resolves_against_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "[scenario]\nname = heart\n[geometry]\ndir = decks\n").unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.geometry_dir.unwrap(), dir.path().join("decks"));
}

#[test]
fn missing_file_reports_path() {
    let err = load_config("/nonexistent/run.cfg").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/run.cfg"), "{err}");
}
