use critlab_cli::config::{emit_config, load_config, parse_config, Experiment};
use critlab_cli::demos::DEMOS;

#[test]
fn demos_round_trip() {
    for (name, text) in DEMOS {
        let cfg = load_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_config(&emit_config(&cfg)).unwrap();
        assert_eq!(again, cfg, "{name}");
        assert_eq!(emit_config(&again), emit_config(&cfg), "{name}");
    }
}

#[test]
fn every_kind_has_a_demo() {
    let kinds: Vec<&str> = DEMOS.iter().map(|(_, t)| parse_config(t).unwrap().experiment.kind()).collect();
    for k in [
        "orbit-trace",
        "ulam-density",
        "lq-sweep",
        "phase-scan",
        "kac",
        "continuity",
        "bounds-check",
        "inducing-report",
    ] {
        assert!(kinds.contains(&k), "{k}");
    }
}

#[test]
fn family_tables_round_trip() {
    let text = r#"
schema = 1

[system]
maps = [{ family = "power-good", r = 3.0, c = 0.4 }, { family = "power-bad", ell = 2.0, flip = true, c = 0.4 }, "doubling"]
p = [0.3, 0.3, 0.4]
seed = 1

[experiment]
kind = "kac"
samples = 100
g = 0
"#;
    let cfg = parse_config(text).unwrap();
    assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    assert!(matches!(cfg.experiment, Experiment::Kac { g: Some(0), t: None, cap: 1_000_000, .. }));
}

#[test]
fn strict_parsing() {
    let base = DEMOS[0].1;
    for bad in [
        base.replace("kind = \"orbit-trace\"", "kind = \"orbit-tracer\""),
        base.replace("seed = 2", "seed = -2"),
        base.replace("steps = 500", "steps = 500.5"),
        base.replace("schema = 1", "schema = 1\nextra = true"),
        base.replace("schema = 1\n", ""),
    ] {
        assert!(parse_config(&bad).is_err(), "{bad}");
    }
    let err = parse_config(&base.replace("steps = 500", "steps = \"many\"")).unwrap_err();
    assert!(err.line.is_some());
}
