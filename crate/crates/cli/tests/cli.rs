use std::path::PathBuf;
use std::process::{Command, Output};

use dimbound::commands::{bounds, fig1, BoundsJson};
use dimbound::config::RunConfig;
use dimbound::presets;
use dimbound_core::dimension::{dimension_bounds, BoundsMode, BoundsOptions};
use dimbound_core::spectra::PsiSpec;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimbound")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dimbound-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn diagonal_bounds_aggregate() {
    let csv = stdout(&["bounds", "--preset", "diagonal"]);
    let last = csv.lines().last().unwrap();
    assert_eq!(last, "limsup,,1.33333333,,1.33333333,,1.33333333,");
    assert!(csv.starts_with("n,tau_n,min_s_lower,argmin_lower,min_s_upper,argmin_upper,min_s_hat,argmin_hat\n"));
}

#[test]
fn large_tau_reports_coincidence() {
    let json = stdout(&["bounds", "--preset", "fig1", "--tau", "2", "--json"]);
    let report: BoundsJson = serde_json::from_str(&json).unwrap();
    assert_eq!(report.aggregate.regime, "coincide");
    let a = &report.aggregate;
    assert!((a.s_lower - a.s_hat).abs() < 1e-9 && (a.s_upper - a.s_hat).abs() < 1e-9);
}

#[test]
fn increasing_table_is_rejected_with_location() {
    let dir = scratch("bad");
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        "{\n  \"schema\": 1,\n  \"family\": {\"kind\": \"preset\", \"name\": \"cor18\"},\n  \"n_range\": [1, 3],\n  \"psi\": {\"kind\": \"table\", \"values\": [0.5, 0.6, 0.1]}\n}\n",
    )
    .unwrap();
    let out = run(&["--config", path.to_str().unwrap(), "bounds"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("psi must be nonincreasing"), "{err}");
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn jordan_formula_value() {
    assert_eq!(stdout(&["formula", "jordan", "--blocks", "2:3", "--tau", "1"]).trim(), "1.22815167");
}

#[test]
fn example_lattice_minima() {
    let out = stdout(&["lattice", "minima", "--matrix", "example1", "--k", "262", "--n", "2"]);
    assert_eq!(out.trim(), r#"["1/68644","1/25","1/25"]"#);
}

#[test]
fn doubling_map_box_count() {
    let out = stdout(&["empirical", "boxcount", "--preset", "cor18"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() <= 0.1, "slope {slope}");
}

#[test]
fn bounds_files_round_trip_and_are_deterministic() {
    let (a, b) = (scratch("a"), scratch("b"));
    for dir in [&a, &b] {
        stdout(&["--out", dir.to_str().unwrap(), "--seed", "3", "bounds", "--preset", "fig1", "--n1", "8"]);
    }
    let csv_a = std::fs::read(a.join("bounds.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("bounds.csv")).unwrap());
    let text = std::fs::read_to_string(a.join("bounds.json")).unwrap();
    let parsed: BoundsJson = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", text);
    let cfg = RunConfig::parse(&serde_json::to_string(&parsed.config).unwrap()).unwrap();
    assert_eq!(cfg, parsed.config);
    assert_eq!(cfg.seed, 3);
}

#[test]
fn preset_configs_reproduce_in_process() {
    let cfg = presets::config("diagonal", None).unwrap();
    let (csv, json) = bounds(&cfg).unwrap();
    let (csv2, json2) = bounds(&cfg).unwrap();
    assert_eq!(csv, csv2);
    assert_eq!(json, json2);
}

#[test]
fn fig1_upper_curve_matches_generic_hat() {
    let family = presets::family("fig1", None).unwrap();
    let taus: Vec<f64> = (1..=30).map(|i| i as f64 / 10.0).collect();
    let opts = BoundsOptions { mode: BoundsMode::Analytic, ..BoundsOptions::default() };
    for row in fig1(&taus).unwrap() {
        let r = dimension_bounds(&family, &PsiSpec::exponential(row.tau), 1..=1, &opts).unwrap();
        assert!((row.s_upper_formula - r.s_hat).abs() < 1e-9, "tau {}: {} vs {}", row.tau, row.s_upper_formula, r.s_hat);
    }
}

#[test]
fn unknown_preset_fails() {
    let out = run(&["bounds", "--preset", "nope"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}
