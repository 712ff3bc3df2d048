//! End-to-end pipeline through the binary: gen-model → smooth → sample →
//! label → learn, plus oracle battery exit codes and experiment determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_junta-mrf"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("junta-mrf-cli-{name}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn ok(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn full_learning_pipeline() {
    let dir = workdir("pipeline");
    let model = dir.join("model.json");
    let smoothed = dir.join("smoothed.json");
    let junta = dir.join("junta.json");
    let samples = dir.join("samples.jsonl");
    let labeled = dir.join("labeled.jsonl");
    let report = dir.join("report.json");

    let out = bin()
        .args(["gen-model", "--n", "8", "--d", "2", "--lambda", "0.5", "--sigma", "0.3"])
        .args(["--seed", "11"])
        .arg("--output")
        .arg(&model)
        .output()
        .unwrap();
    ok(&out);
    let text = fs::read_to_string(&model).unwrap();
    assert!(!text.contains("alpha"));

    let out = bin()
        .args(["smooth", "--model"])
        .arg(&model)
        .args(["--seed", "12"])
        .arg("--output")
        .arg(&smoothed)
        .output()
        .unwrap();
    ok(&out);
    assert!(fs::read_to_string(&smoothed).unwrap().contains("alpha"));

    // dictator on variable 3
    fs::write(&junta, r#"{"n": 8, "relevant": [3], "table": "01"}"#).unwrap();

    let out = bin()
        .args(["sample", "--model"])
        .arg(&smoothed)
        .args(["--count", "20000", "--sampler", "exact", "--seed", "13"])
        .arg("--output")
        .arg(&samples)
        .output()
        .unwrap();
    ok(&out);
    assert_eq!(fs::read_to_string(&samples).unwrap().lines().count(), 20000);

    let out = bin()
        .args(["label", "--samples"])
        .arg(&samples)
        .arg("--junta")
        .arg(&junta)
        .arg("--output")
        .arg(&labeled)
        .output()
        .unwrap();
    ok(&out);

    let out = bin()
        .args(["learn", "--model"])
        .arg(&smoothed)
        .arg("--samples")
        .arg(&labeled)
        .args(["--threshold-mode", "calibrated", "--junta"])
        .arg(&junta)
        .arg("--output")
        .arg(&report)
        .output()
        .unwrap();
    ok(&out);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["relevant"], serde_json::json!([3]));
    assert_eq!(report["hypothesis"]["table"], serde_json::json!("01"));
}

#[test]
fn smooth_is_seed_deterministic() {
    let dir = workdir("smooth-determinism");
    let model = dir.join("model.json");
    ok(&bin()
        .args(["gen-model", "--n", "5", "--d", "2", "--lambda", "0.4", "--sigma", "0.25"])
        .args(["--seed", "3"])
        .arg("--output")
        .arg(&model)
        .output()
        .unwrap());
    let run = |seed: &str| {
        let out = bin()
            .args(["smooth", "--model"])
            .arg(&model)
            .args(["--seed", seed])
            .output()
            .unwrap();
        ok(&out);
        out.stdout
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn oracle_battery_exit_codes() {
    let dir = workdir("oracle");
    let battery = dir.join("battery.json");

    // empty battery: empty stream, success
    fs::write(&battery, r#"{"seed": 5, "checks": []}"#).unwrap();
    let out = bin().args(["oracle", "--battery"]).arg(&battery).output().unwrap();
    ok(&out);
    assert!(out.stdout.is_empty());

    // small passing battery
    fs::write(
        &battery,
        r#"{"seed": 5, "checks": [
            {"check": "markov_soundness", "models": 3, "juntas": 2},
            {"check": "under_conditioning_control"}
        ]}"#,
    )
    .unwrap();
    let out = bin().args(["oracle", "--battery"]).arg(&battery).output().unwrap();
    ok(&out);
    let lines: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(lines.len(), 2);
    for line in &lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], serde_json::json!(true));
    }

    // corrupted model file (width above lambda) fails validation: exit 1
    let bad_model = dir.join("bad-model.json");
    fs::write(
        &bad_model,
        r#"{"n":2,"lambda":0.1,"sigma":0.3,"edges":[[0,1]],"psi_bar":[{"vars":[0,1],"coeff":5.0}]}"#,
    )
    .unwrap();
    fs::write(
        &battery,
        format!(
            r#"{{"checks": [{{"check": "validate_model", "path": {}}}]}}"#,
            serde_json::json!(bad_model.to_str().unwrap())
        ),
    )
    .unwrap();
    let out = bin().args(["oracle", "--battery"]).arg(&battery).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&out.stdout).unwrap().lines().next().unwrap())
            .unwrap();
    assert_eq!(v["pass"], serde_json::json!(false));

    // unknown check name is a hard error
    fs::write(&battery, r#"{"checks": [{"check": "nonsense"}]}"#).unwrap();
    let out = bin().args(["oracle", "--battery"]).arg(&battery).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("battery spec"));
}

#[test]
fn experiment_csv_reproducible() {
    let dir = workdir("experiment");
    let config = dir.join("config.json");
    fs::write(
        &config,
        r#"{
            "n": 6, "k": 1, "d": 2, "sigma": 0.3, "lambda": 0.5,
            "N": 2000, "trials": 6, "seed": 21,
            "threshold_mode": {"mode": "calibrated"},
            "sampler": "exact"
        }"#,
    )
    .unwrap();
    let run = || {
        let out = bin().args(["experiment", "--config"]).arg(&config).output().unwrap();
        ok(&out);
        out.stdout
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("trial,seed,n,k,d,sigma,lambda,N,threshold,"));
    assert_eq!(text.lines().count(), 7);
}
