use phenoinvade_core::ibm::{initial_rho_max, Space};
use phenoinvade_core::io::{load_preset, parse_config, PRESETS};
use phenoinvade_core::ConfigError;

#[test]
fn every_preset_loads() {
    for name in PRESETS {
        let cfg = load_preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(cfg.model.base().rho_max > 0.0, "{name}");
        assert_eq!(cfg.snapshots.last().copied(), Some(cfg.model.base().t_final), "{name}");
    }
}

#[test]
fn unknown_preset_is_named() {
    let err = load_preset("nope").unwrap_err();
    assert!(matches!(err, ConfigError::UnknownPreset(ref n) if n == "nope"));
}

#[test]
fn oversized_random_move_probability_names_the_constraint() {
    // theta = 2 tau eps^2 / dx^2 = 2 * 0.01 * 0.25 / 0.0025 = 2
    let err = parse_config("eps = 0.5\ndx = 0.05\ntau = 0.01\nx_max = 1.0\nt_final = 1.0\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("theta"), "{msg}");
}

#[test]
fn misaligned_grid_is_rejected() {
    let err = parse_config("dx = 0.3\nx_max = 1.0\nt_final = 1.0\n").unwrap_err();
    assert!(err.to_string().contains("whole numbers"), "{err}");
}

#[test]
fn carrying_density_defaults_to_initial_maximum() {
    let text = "preset = \"desk-1d\"\n";
    let cfg = parse_config(text).unwrap();
    let nx = cfg.model.params().nx();
    let expected = initial_rho_max(&cfg.profile, Space::Line { nx }, &cfg.model);
    assert_eq!(cfg.model.base().rho_max, expected);
    // a0 = 1000 at dx = 0.2, dy = 0.05 keeps the full-grid density of 1e5
    assert!((expected / 1e5 - 1.0).abs() < 0.05, "{expected}");

    let fixed = parse_config("preset = \"desk-1d\"\nrho_max = 7.0\n").unwrap();
    assert_eq!(fixed.model.base().rho_max, 7.0);
}

#[test]
fn derived_density_follows_eps() {
    let cfg = load_preset("desk-1d").unwrap();
    let narrow = cfg.with_eps(1e-3).unwrap();
    assert_eq!(narrow.model.params().eps(), 1e-3);
    let nx = narrow.model.params().nx();
    assert_eq!(narrow.model.base().rho_max, initial_rho_max(&narrow.profile, Space::Line { nx }, &narrow.model));
}

#[test]
fn empty_initial_lattice_is_an_error() {
    let err = parse_config("a0 = 1e-9\nx_max = 1.0\nt_final = 1.0\n").unwrap_err();
    assert!(matches!(err, ConfigError::RunSpec(_)), "{err}");
}

#[test]
fn snapshot_times_are_checked() {
    for bad in ["[2.0]", "[0.5, 0.2]", "[]", "[-1.0]"] {
        let text = format!("x_max = 1.0\nt_final = 1.0\nsnapshots = {bad}\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::RunSpec(_))), "{bad}");
    }
}

#[test]
fn overrides_apply_on_top_of_preset() {
    let cfg = parse_config("preset = \"desk-sweep\"\neps_sweep = [1e-2, 2e-3]\nseed = 9\n").unwrap();
    assert_eq!(cfg.eps_sweep, vec![1e-2, 2e-3]);
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.model.params().dx(), 1.25e-2);
    assert!(!cfg.sweep_ibm);
}

#[test]
fn malformed_toml_and_unknown_keys() {
    assert!(matches!(parse_config("eps = "), Err(ConfigError::Parse(_))));
    assert!(parse_config("epsilon = 0.1\n").is_err());
    assert!(matches!(parse_config("dims = 3\nx_max = 1.0\nt_final = 1.0\n"), Err(ConfigError::RunSpec(_))));
}

#[test]
fn dt_fraction_is_bounded() {
    assert_eq!(load_preset("desk-sweep").unwrap().dt_fraction, 0.9);
    assert_eq!(load_preset("desk-1d").unwrap().dt_fraction, 0.1);
    for bad in ["0.0", "1.5", "-0.2"] {
        let text = format!("x_max = 1.0\nt_final = 1.0\ndt_fraction = {bad}\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::RunSpec(_))), "{bad}");
    }
}
