use std::path::Path;
use std::process::{Command, Output};

use ellipse_phase::cli::{run_with, Config, Environment};
use serde_json::Value;

const SQUARE: &str = r#"{"p1": [1, 0], "p2": [0, 1]}"#;
const DIVISOR: &str = r#"{"zeros": [[0.3, 0.4, 1]], "poles": [[0.6, 0.1, 1]]}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    run_env(args, &Environment::default())
}

fn run_env(args: &[&str], env: &Environment) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("ellipse-phase").chain(args.iter().copied());
    let code = run_with(argv, env, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn binary(dir: &Path, args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ellipse-phase"));
    cmd.args(args).current_dir(dir).env_remove("ELLIPSE_PHASE_SEED");
    if let Some(s) = seed {
        cmd.env("ELLIPSE_PHASE_SEED", s);
    }
    cmd.output().unwrap()
}

fn synth(m1: &str) -> String {
    let (code, out, err) = run(&["synth", "--lattice", SQUARE, "--divisor", DIVISOR, "--m1", m1]);
    assert_eq!(code, 0, "{err}");
    out
}

#[test]
fn sigma_prints_fifteen_significant_digits() {
    let (code, out, _) = run(&["sigma", "--lattice", SQUARE, "--z", "0.43,0.17"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    let digits = |s: &str| s.chars().filter(|c| c.is_ascii_digit()).collect::<String>().trim_start_matches('0').len();
    let log_mag = lines[0].strip_prefix("log_mag ").unwrap();
    assert_eq!(digits(log_mag), 15, "{log_mag}");
    assert!(lines[1].starts_with("phase "));

    let (_, out, _) = run(&["sigma", "--lattice", SQUARE, "--z", "0,0"]);
    assert!(out.starts_with("log_mag -inf\nphase 0\n"), "{out}");
}

#[test]
fn sigma_backends_agree() {
    let value = |backend: &str| {
        let (code, out, _) = run(&["sigma", "--lattice", SQUARE, "--z", "-0.3,0.2", "--backend", backend, "--shells", "100"]);
        assert_eq!(code, 0);
        out.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse::<f64>().unwrap()
    };
    assert!((value("fast") - value("direct")).abs() < 1e-3);
}

#[test]
fn eta_and_vj() {
    let (code, out, _) = run(&["eta", "--lattice", SQUARE]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["eta1"][0].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);

    let (code, out, _) = run(&["vj", "--lattice", SQUARE, "--xi0", "0.3,0.2", "--j", "1", "--method", "direct", "--shells", "50"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["error_bound"].as_f64().unwrap() > 0.0);
    assert!((v["v"][0].as_f64().unwrap() + 0.3 * std::f64::consts::PI).abs() < v["error_bound"].as_f64().unwrap());

    let (code, _, err) = run(&["vj", "--lattice", SQUARE, "--xi0", "0.3,0.2", "--j", "3"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn synth_verify_round_trip() {
    let spec = synth("1");
    let v: Value = serde_json::from_str(&spec).unwrap();
    for key in ["lattice", "divisor", "xi0", "a", "alpha", "m", "v", "g"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["m"], serde_json::json!([1, 0]));
    let (code, out, err) = run(&["verify", "--spec", &spec]);
    assert_eq!(code, 0, "{out}{err}");
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["zero_count"], 1);
}

#[test]
fn verify_fails_with_exit_two_on_impossible_tolerance() {
    let spec = synth("0");
    let (code, out, _) = run(&["verify", "--spec", &spec, "--tol", "1e-300"]);
    assert_eq!(code, 2);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["passed"], Value::Bool(false));
}

#[test]
fn unbalanced_divisor_is_a_validation_error() {
    let (code, out, err) = run(&["synth", "--lattice", SQUARE, "--divisor", r#"{"zeros": [[0.3, 0.4]]}"#]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("UnbalancedDivisor"), "{err}");
}

#[test]
fn degenerate_lattice_and_bad_json() {
    let (code, _, err) = run(&["eta", "--lattice", r#"{"p1": [1, 0], "p2": [2, 0]}"#]);
    assert_eq!(code, 1);
    assert!(err.contains("DegenerateLattice"));
    let (code, _, _) = run(&["eta", "--lattice", "{not json"]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_subcommand_prints_usage() {
    let (code, out, err) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn help_on_every_subcommand() {
    for sub in ["sigma", "eta", "vj", "synth", "verify", "plot"] {
        let (code, out, _) = run(&[sub, "--help"]);
        assert_eq!(code, 0, "{sub}");
        assert!(out.contains("Usage"), "{sub}");
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("synth"));
}

#[test]
fn missing_files_are_io_errors() {
    let (code, _, err) = run(&["verify", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn plot_is_deterministic_and_accepts_synth_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, synth("0")).unwrap();
    let render = |name: &str, coloring: &str| {
        let out = dir.path().join(name);
        let (code, _, err) = run(&[
            "plot", "--spec", spec_path.to_str().unwrap(), "--out", out.to_str().unwrap(),
            "--px", "40x30", "--coloring", coloring,
        ]);
        assert_eq!(code, 0, "{err}");
        std::fs::read(out).unwrap()
    };
    let a = render("a.ppm", "phase");
    assert_eq!(a, render("b.ppm", "phase"));
    assert!(a.starts_with(b"P6\n40 30\n255\n"));
    assert_eq!(a.len(), b"P6\n40 30\n255\n".len() + 40 * 30 * 3);
    assert_ne!(a, render("c.ppm", "contours"));
}

#[test]
fn synth_output_is_deterministic() {
    assert_eq!(synth("2"), synth("2"));
}

#[test]
fn config_supplies_missing_flags() {
    let env = Environment {
        config: Config::from_json(&format!(r#"{{"lattice": {SQUARE}, "m2": -1}}"#)).unwrap(),
        seed_override: None,
    };
    let (code, out, err) = run_env(&["synth", "--divisor", DIVISOR], &env);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["m"], serde_json::json!([0, -1]));
    // Command line flags win over the config file.
    let (_, out, _) = run_env(&["synth", "--divisor", DIVISOR, "--m2", "3"], &env);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["m"], serde_json::json!([0, 3]));
}

#[test]
fn config_file_and_seed_variable_in_a_real_process() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), synth("0")).unwrap();
    std::fs::write(dir.path().join("ellipse-phase.json"), r#"{"grid": "3x2", "seed": 5}"#).unwrap();
    let report = |seed_flag: Option<&str>, env_seed: Option<&str>| {
        let mut args = vec!["verify", "--spec", "spec.json"];
        if let Some(s) = seed_flag {
            args.extend(["--seed", s]);
        }
        let out = binary(dir.path(), &args, env_seed);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice::<Value>(&out.stdout).unwrap()
    };
    let from_config = report(None, None);
    assert_eq!(from_config["samples_used"], 12);
    let explicit = report(Some("5"), None);
    assert_eq!(from_config, explicit);
    let other = report(Some("6"), None);
    assert_ne!(other["contour_offset"], explicit["contour_offset"]);
    // The environment variable overrides the flag.
    assert_eq!(report(Some("6"), Some("5")), explicit);
}
