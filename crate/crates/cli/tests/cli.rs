// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const START: &str = "1589414400";

fn run(state: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfcontract"))
        .arg("--state")
        .arg(state)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(state: &Path, args: &[&str]) -> String {
    let out = run(state, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn setup(state: &Path) {
    ok(
        state,
        &[
            "deploy", "--as", "owner", "--at", START, "--actor", "owner=100", "--actor", "bo=100", "--actor",
            "contractor=100", "--actor", "fm=100", "--actor", "oracle=100",
        ],
    );
    ok(state, &["role", "add", "--as", "owner", "--role", "building-owner", "--grantee", "bo"]);
    ok(state, &["role", "add", "--as", "owner", "--role", "contractor", "--grantee", "contractor"]);
    ok(state, &["role", "add", "--as", "owner", "--role", "facility-manager", "--grantee", "fm"]);
    ok(state, &["case", "create", "--as", "owner"]);
    ok(state, &["fund", "--as", "bo"]);
    ok(state, &["backend", "register", "--as", "owner", "--backend", "oracle"]);
}

#[test]
fn step_by_step_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("ws");
    let data = dir.path().join("data.csv");
    ok(&state, &["synth-gen", "--out", data.to_str().unwrap(), "--seed", "3"]);
    assert!(dir.path().join("data.spec.json").exists());
    setup(&state);

    let d = data.to_str().unwrap();
    let report = ok(&state, &["oracle", "run", "--data", d, "--seed", "1", "--until", "1589500800"]);
    assert!(report.contains("rejected   0"));
    let first: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(state.join("status.json")).unwrap()).unwrap();
    ok(&state, &["oracle", "run", "--data", d, "--seed", "1"]);
    ok(&state, &["evaluate", "--as", "fm"]);
    let out = ok(&state, &["release", "--as", "bo"]);
    assert!(out.contains("ReleaseEscrow accepted"));

    let status: serde_json::Value = serde_json::from_str(&ok(&state, &["status", "--json"])).unwrap();
    assert_eq!(status["state"], "Completed");
    assert!(status["measurements"].as_u64().unwrap() > first["measurements"].as_u64().unwrap());
    assert!(state.join("results.csv").exists());
    assert!(state.join("log.csv").exists());
}

#[test]
fn resumed_oracle_matches_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let d = data.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&a, &["synth-gen", "--out", d, "--seed", "5"]);
    setup(&a);
    setup(&b);
    ok(&a, &["oracle", "run", "--data", d, "--seed", "9", "--until", "1589450000"]);
    ok(&a, &["oracle", "run", "--data", d, "--seed", "9"]);
    ok(&b, &["oracle", "run", "--data", d, "--seed", "9"]);
    let status = |s: &Path| -> serde_json::Value {
        serde_json::from_str(&ok(s, &["status", "--json"])).unwrap()
    };
    assert_eq!(status(&a)["measurements"], status(&b)["measurements"]);
    assert_eq!(
        fs::read_to_string(a.join("results.csv")).unwrap(),
        fs::read_to_string(b.join("results.csv")).unwrap()
    );
}

#[test]
fn rejected_call_is_logged_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("ws");
    setup(&state);
    let before = fs::read_to_string(state.join("log.csv")).unwrap().lines().count();
    let out = run(&state, &["deactivate", "--as", "fm"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("rejected(Unauthorized)"));
    let after = fs::read_to_string(state.join("log.csv")).unwrap().lines().count();
    assert_eq!(after, before + 1);
}

#[test]
fn status_and_report_do_not_transact() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("ws");
    setup(&state);
    let log = fs::read_to_string(state.join("log.csv")).unwrap();
    ok(&state, &["status"]);
    let report = ok(&state, &["report", "--gas-price", "89.8", "--fiat-rate", "322.5"]);
    assert!(report.contains("fiat cost"));
    assert!(state.join("report.json").exists());
    assert_eq!(fs::read_to_string(state.join("log.csv")).unwrap(), log);
}

#[test]
fn unknown_actor_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("ws");
    setup(&state);
    let out = run(&state, &["redeem", "--as", "mallory"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown actor"));
}

#[test]
fn replication_scenario_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("ws");
    let text = ok(&state, &["scenario", "run", "--seed", "2020"]);
    assert!(text.contains("Completed"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(state.join("summary.json")).unwrap()).unwrap();
    let n = summary["measurements"].as_u64().unwrap();
    assert!((1117..=1365).contains(&n), "{n}");

    // a second run refuses to overwrite existing state
    let again = run(&state, &["scenario", "run"]);
    assert!(!again.status.success());
}

#[test]
fn failing_scenario_names_its_step() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("ws");
    let cfg = dir.path().join("cfg.json");
    let defaults = ok(&state, &["config", "print-defaults", "scenario"]);
    let mut v: serde_json::Value = serde_json::from_str(&defaults).unwrap();
    v["dataset"] = serde_json::json!({"source": "csv", "path": dir.path().join("missing.csv")});
    fs::write(&cfg, v.to_string()).unwrap();
    let out = run(&state, &["scenario", "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("load_data"));
}

#[test]
fn defaults_round_trip_as_json() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["scenario", "case", "sampling", "synthetic", "gas-schedule"] {
        let text = ok(dir.path(), &["config", "print-defaults", kind]);
        serde_json::from_str::<serde_json::Value>(&text).unwrap();
    }
}
