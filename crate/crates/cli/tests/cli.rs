use std::path::Path;
use std::process::{Command, Output};

fn tqg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tqg"))
        .args(args)
        .current_dir(dir)
        .env_remove("TQG_LOG")
        .output()
        .expect("binary runs")
}

fn error_json(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("error.json")).expect("error.json written");
    serde_json::from_str(&text).unwrap()
}

#[test]
fn lattice_verify_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"lemma": "lattice", "r": 3, "radii": [10, 20]}"#).unwrap();
    let out = tqg(&["verify", "--lemma", "lattice", "--config", "c.json", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("res/lattice.csv")).unwrap();
    assert!(csv.contains("R,partial_sum,tail_estimate\n"));
}

#[test]
fn odd_grid_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"N": 7}"#).unwrap();
    let out = tqg(&["simulate", "--config", "c.json", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(stderr["message"], "N must be even");
    let e = error_json(&dir.path().join("res"));
    assert_eq!(e["operation"], "parse_config");
    assert_eq!(e["message"], "N must be even");
}

#[test]
fn unknown_key_named() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"N": 8, "visocsity": 0.1}"#).unwrap();
    let out = tqg(&["simulate", "--config", "c.json", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&dir.path().join("res"));
    assert_eq!(e["module"], "cli_io");
    assert!(e["message"].as_str().unwrap().contains("visocsity"));
}

#[test]
fn missing_input_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"N": 8, "phi0": 0.5, "ray": {"theta": 0, "s_max": 0.01},
            "data": {"kind": "files", "b0": "nope.json", "q0": "nope.json"}}"#,
    )
    .unwrap();
    let out = tqg(&["simulate", "--config", "c.json", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&dir.path().join("res"));
    assert!(e["message"].as_str().unwrap().contains("nope.json"));
}

#[test]
fn missing_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = tqg(&["radius", "--config", "absent.json", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("res/error.json").is_file());
}

#[test]
fn blow_up_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"N": 16, "phi0": 0.5, "c": 1, "ray": {"theta": 0, "s_max": 1, "ds": 0.1},
            "data": {"kind": "generator", "amplitude": 10, "phi_star": 0, "p": 0}}"#,
    )
    .unwrap();
    let out = tqg(&["simulate", "--config", "c.json", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let e = error_json(&dir.path().join("res"));
    assert_eq!(e["module"], "complex_time_integrator");
}

#[test]
fn strict_turns_violations_into_failure() {
    let dir = tempfile::tempdir().unwrap();
    // c far too small for large data off the real axis: the growth bound fails
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"N": 16, "phi0": 0.1, "c": 0.0001, "ray": {"theta": 1.0, "s_max": 0.05, "ds": 0.0005},
            "data": {"kind": "generator", "amplitude": 5, "bathymetry": 5, "phi_star": 0.2, "p": 3}}"#,
    )
    .unwrap();
    let lax = tqg(&["simulate", "--config", "c.json", "--out", "a"], dir.path());
    assert_eq!(lax.status.code(), Some(0), "{}", String::from_utf8_lossy(&lax.stderr));
    let monitor: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/monitor.json")).unwrap()).unwrap();
    assert!(!monitor["violations"].as_array().unwrap().is_empty());
    let strict = tqg(&["--strict", "simulate", "--config", "c.json", "--out", "b"], dir.path());
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn seed_flag_and_threads_keep_outputs_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"N": 16, "trials": 40, "r": 3, "phi": 0.2}"#,
    )
    .unwrap();
    let run = |out: &str, threads: &str, seed: &str| {
        let o = tqg(
            &["verify", "--lemma", "convest", "--config", "c.json", "--out", out, "--threads", threads, "--seed", seed],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(dir.path().join(out).join("convest_report.json")).unwrap()
    };
    let a = run("a", "1", "5");
    let b = run("b", "4", "5");
    let c = run("c", "4", "6");
    assert_eq!(a, b);
    assert_ne!(a, c);
}
