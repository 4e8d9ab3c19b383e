use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use serde_json::{json, Value};
use tempfile::TempDir;
use wvtorus::cli::{execute, run, Command, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes").join(name)
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(scene(name)).unwrap()).unwrap()
}

/// Writes a modified scene next to the outputs and returns its path.
fn write_scene(dir: &Path, value: &Value) -> PathBuf {
    let p = dir.join("scene.json");
    fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn binary_validates_the_atomic_scene() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let status = Process::new(env!("CARGO_BIN_EXE_wvtorus"))
        .args(["validate", "--config"])
        .arg(scene("two_atom.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let m = manifest(&out);
    assert_eq!(m["command"], "validate");
    let w1m = m["measures"]["W(1-)"].as_f64().unwrap();
    assert!((w1m - (2.0 + 2f64.exp())).abs() < 1e-9, "{w1m}");
    let masses: Vec<f64> = m["measures"]["W_atoms"].as_array().unwrap().iter().map(|a| a["mass"].as_f64().unwrap()).collect();
    assert_eq!(masses.len(), 2);
    assert!((masses[0] - 1.375).abs() < 1e-12);
    assert!(m["config_sha256"].as_str().unwrap().len() == 64);
    assert!(out.join("validate.csv").exists());
}

#[test]
fn eig_on_the_classical_scene() {
    let tmp = TempDir::new().unwrap();
    let rep = execute(Command::Eig, &scene("classical.json"), Some(tmp.path()), None).unwrap();
    assert!(rep.failures.is_empty());
    let ev: Vec<f64> = rep.summary["eigenvalues"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let exact = [0.0, 4.0 * std::f64::consts::PI.powi(2), 4.0 * std::f64::consts::PI.powi(2), 16.0 * std::f64::consts::PI.powi(2), 16.0 * std::f64::consts::PI.powi(2)];
    assert!(ev[0].abs() < 1e-8);
    for (a, b) in ev.iter().zip(exact).skip(1) {
        assert!((a - b).abs() < 0.02 * b, "{a} vs {b}");
    }
    assert!(tmp.path().join("eig.csv").exists() && tmp.path().join("eig.svg").exists());
}

#[test]
fn flat_segment_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let mut s = load("classical.json");
    s["w"]["segments"] = json!([{ "x": 0.0, "slope": 1.0 }, { "x": 0.5, "slope": 0.0 }]);
    let cfg = write_scene(tmp.path(), &s);
    let out = Process::new(env!("CARGO_BIN_EXE_wvtorus"))
        .args(["validate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("strict monotonicity"), "{stderr}");
}

#[test]
fn unreadable_or_malformed_scenes_are_validation_errors() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(Command::Validate, &tmp.path().join("missing.json"), Some(tmp.path()), None), EXIT_VALIDATION);
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ \"w\": 3 }").unwrap();
    assert_eq!(run(Command::Validate, &bad, Some(tmp.path()), None), EXIT_VALIDATION);
}

#[test]
fn impossible_tolerance_reports_a_failed_check() {
    let tmp = TempDir::new().unwrap();
    let mut s = load("two_atom.json");
    s["sample"]["n_paths"] = json!(2000);
    s["sample"]["tolerance_se"] = json!(1e-6);
    let cfg = write_scene(tmp.path(), &s);
    assert_eq!(run(Command::SampleBm, &cfg, Some(&tmp.path().join("out")), None), EXIT_NUMERICAL);
    assert!(!manifest(&tmp.path().join("out"))["failures"].as_array().unwrap().is_empty());
}

fn small_sample_scene(dir: &Path) -> PathBuf {
    let mut s = load("two_atom.json");
    s["sample"]["n_paths"] = json!(500);
    s["spde"]["n_paths"] = json!(200);
    write_scene(dir, &s)
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_sample_scene(tmp.path());
    for cmd in [Command::SampleBm, Command::Spde] {
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        let ra = execute(cmd, &cfg, Some(&a), None).unwrap();
        execute(cmd, &cfg, Some(&b), None).unwrap();
        for name in ra.outputs.iter().filter(|n| n.ends_with(".csv")) {
            assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn seed_override_changes_paths_and_is_recorded() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_sample_scene(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    execute(Command::SampleBm, &cfg, Some(&a), None).unwrap();
    execute(Command::SampleBm, &cfg, Some(&b), Some(99)).unwrap();
    assert_eq!(manifest(&b)["seed"], 99);
    assert_eq!(manifest(&a)["seed"], 20240611);
    assert_ne!(fs::read(a.join("sample-bm_path_0.csv")).unwrap(), fs::read(b.join("sample-bm_path_0.csv")).unwrap());
}

#[test]
fn every_command_runs_on_both_scenes() {
    let tmp = TempDir::new().unwrap();
    let mut fig = load("two_atom.json");
    for key in ["sample", "integrate", "spde"] {
        fig[key]["n_paths"] = json!(400);
        fig[key]["tolerance_se"] = json!(6.0);
    }
    let mut cls = load("classical.json");
    cls["sample"]["n_paths"] = json!(400);
    cls["spde"]["n_paths"] = json!(400);
    cls["spde"]["tolerance_se"] = json!(6.0);
    for (k, s) in [fig, cls].iter().enumerate() {
        let dir = tmp.path().join(format!("s{k}"));
        fs::create_dir_all(&dir).unwrap();
        let cfg = write_scene(&dir, s);
        for cmd in [
            Command::Validate,
            Command::Eig,
            Command::Shoot,
            Command::Solve,
            Command::SampleBm,
            Command::SampleBridge,
            Command::Integrate,
            Command::SemigroupCheck,
            Command::Spde,
        ] {
            let out = dir.join(cmd.name());
            let rep = execute(cmd, &cfg, Some(&out), None).unwrap_or_else(|e| panic!("{}: {e}", cmd.name()));
            assert!(rep.outputs.contains(&"manifest.json".to_string()));
            assert_eq!(manifest(&out)["command"], cmd.name());
        }
    }
}
