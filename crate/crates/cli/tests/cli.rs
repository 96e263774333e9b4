use std::fs;
use std::process::{Command, Output};

use biphoton_core::{read_curve, YKind};
use serde_json::Value;

fn biphoton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biphoton")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn close(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() <= tol
}

#[test]
fn check_default_is_satisfied() {
    let v = stdout_json(&biphoton(&["check"]));
    assert_eq!(v["satisfied"], true);
    assert!(close(&v["predicted_spacetime_visibility"], 0.5, 1e-9));
    assert!(close(&v["predicted_polarization_visibility"], 1.0 / 3.0, 1e-4));
    assert!(close(&v["polarization_visibility"], 1.0 / 3.0, 1e-4));
}

#[test]
fn check_single_pulse_and_mistuned_tau1() {
    let v = stdout_json(&biphoton(&["check", "--set", "pump.n_pulses=1"]));
    assert_eq!(v["satisfied"], false);
    assert!(v["predicted_spacetime_visibility"].as_f64().unwrap() < 1e-6);
    assert!(v["predicted_polarization_visibility"].as_f64().unwrap() < 1e-6);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tau1.ini");
    fs::write(&cfg, "[interferometer]\ntau1 = 197 um\n").unwrap();
    let v = stdout_json(&biphoton(&["check", "--config", cfg.to_str().unwrap()]));
    assert!(close(&v["residual_tau1_fs"], -657.1, 0.05), "{}", v["residual_tau1_fs"]);
    assert_eq!(v["satisfied"], false);
}

#[test]
fn parse_and_file_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[interferometer]\ntau = 197 kg\n").unwrap();
    let out = biphoton(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let out = biphoton(&["check", "--config", dir.path().join("missing.ini").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flags_exit_two() {
    for args in [
        vec!["scan", "--param", "tau", "--from", "0fs", "--to", "10fs", "--steps", "1"],
        vec!["scan", "--param", "tau", "--from", "0", "--to", "10fs", "--steps", "5"],
        vec!["scan", "--param", "theta1", "--from", "0fs", "--to", "10fs", "--steps", "5"],
        vec!["scan", "--param", "bogus", "--from", "0fs", "--to", "10fs", "--steps", "5"],
        vec!["events", "--frames", "0"],
        vec!["oracle", "--steps-per-axis", "32"],
        vec!["frobnicate"],
    ] {
        let out = biphoton(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn scan_reproduces_visibility_peak() {
    let args = [
        "scan", "--param", "inter_pulse_delay", "--from", "533fs", "--to", "933fs", "--steps", "81", "--reduce",
        "polarization-visibility",
    ];
    let out = biphoton(&args);
    assert!(out.status.success());
    let curve = read_curve(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap();
    assert_eq!(curve.y_kind, YKind::Visibility);
    assert_eq!(curve.points.len(), 81);
    assert!((curve.argmax().unwrap() - 657.0).abs() <= 5.0);
    assert_eq!(biphoton(&args).stdout, out.stdout);
}

#[test]
fn scan_fringe_and_units() {
    let out = biphoton(&["scan", "--param", "pump_phase_path", "--from", "0nm", "--to", "1.6um", "--steps", "161", "--format", "json"]);
    let curve = read_curve(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let fit = biphoton_core::fit_fringe(&curve, 400.0).unwrap();
    assert!((fit.period - 400.0).abs() < 0.4);
    let minima = curve.points.windows(3).filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1).count();
    assert_eq!(minima, 3);

    let out = biphoton(&["scan", "--param", "theta1", "--from", "0deg", "--to", "90deg", "--steps", "91"]);
    let curve = read_curve(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(curve.parameter, "theta1_deg");
    assert_eq!(curve.points[45].0, 45.0);
    assert!((biphoton_core::visibility_from_curve(&curve).unwrap() - 1.0 / 3.0).abs() < 1e-3);
}

#[test]
fn events_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let ev = dir.path().join(format!("{tag}.csv"));
        let sum = dir.path().join(format!("{tag}.json"));
        let out = biphoton(&[
            "events", "--frames", "20000", "--seed", "5", "--set", "detectors.pair_probability=0.05",
            "--out-events", ev.to_str().unwrap(), "--out-summary", sum.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        (fs::read(ev).unwrap(), fs::read(sum).unwrap(), out.stdout)
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let summary: Value = serde_json::from_slice(&a.2).unwrap();
    assert_eq!(summary["n_frames"], 20000);
    assert!(summary["coincidences"].as_u64().unwrap() <= summary["singles_d1"].as_u64().unwrap());
    assert!(String::from_utf8(a.0).unwrap().starts_with("frame,detector,timestamp_ps\n"));

    let out = biphoton(&["events", "--frames", "10", "--out-events", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_agrees_and_converges() {
    let v = stdout_json(&biphoton(&["oracle", "--steps-per-axis", "512"]));
    assert!(v["rel_diff"].as_f64().unwrap() <= 1e-4);

    let narrow = ["--set", "model.sigma_plus=12 fs", "--set", "model.sigma_minus=12 fs"];
    let err = |steps: &str| {
        let mut args = vec!["oracle", "--steps-per-axis", steps];
        args.extend(narrow);
        stdout_json(&biphoton(&args))["abs_diff"].as_f64().unwrap()
    };
    let (e128, e256) = (err("128"), err("256"));
    assert!(e128 > 1e-10, "{e128}");
    assert!(e256 <= e128 / 4.0, "{e128} -> {e256}");

    let v = stdout_json(&biphoton(&["oracle", "--steps-per-axis", "128", "--set", "pump.n_pulses=1", "--set", "analyzers.theta1=0 deg", "--set", "analyzers.theta2=90 deg"]));
    assert!(close(&v["closed_form"], 1.0, 1e-12));
    assert!(close(&v["grid"], 1.0, 1e-9));
}

#[test]
fn rate_formats() {
    let v = stdout_json(&biphoton(&["rate", "--set", "pump.extra_phase_path=200 nm"]));
    assert!(close(&v["rate"], 1.5, 1e-6));
    let out = biphoton(&["rate", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("\nrate,0.5\n"));
}
