// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn weakinv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakinv"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_channel_audit_passes() {
    let dir = TempDir::new().unwrap();
    let o = weakinv(dir.path(), &["channel-audit"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("channel-audit.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# generated_unix="));
    assert!(lines.next().unwrap().starts_with("seed,dim,env_dims"));
    assert_eq!(lines.count(), 200);
    let s = summary(&dir.path().join("channel-audit.json"));
    assert_eq!(s["passed"], true);
    assert!(s["max_expectation_drift"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn non_trace_preserving_fixture_is_named() {
    let dir = TempDir::new().unwrap();
    let o = weakinv(
        dir.path(),
        &[
            "channel-audit",
            "--preset",
            "non-tp-fixture",
            "--out",
            "x.csv",
        ],
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not trace preserving"));
    let s = summary(&dir.path().join("x.json"));
    assert_eq!(s["failed_cases"], 5);
}

#[test]
fn empty_range_warns_and_passes() {
    let dir = TempDir::new().unwrap();
    let o = weakinv(dir.path(), &["channel-audit", "--preset", "empty"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("empty"));
}

#[test]
fn hot_oscillator_trips_leakage_guard() {
    let dir = TempDir::new().unwrap();
    let o = weakinv(dir.path(), &["oscillator", "--preset", "oscillator-hot"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("leakage"), "{}", stderr(&o));
}

#[test]
fn short_dt_list_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("k.toml"),
        "[kraus_study]\ndts = [0.01, 0.005, 0.0025]\n",
    )
    .unwrap();
    let o = weakinv(dir.path(), &["kraus-study", "--config", "k.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("at least 4"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.toml"), "[gkls]\nstep_count = 5\n").unwrap();
    let o = weakinv(dir.path(), &["gkls", "--config", "bad.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("step_count"));
}

#[test]
fn config_kind_must_match_subcommand() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.toml"), "kind = \"gkls\"\n").unwrap();
    let o = weakinv(dir.path(), &["entropy-audit", "--config", "c.toml"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn negative_rate_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("n.toml"),
        "[gkls.model]\nkind = \"dephasing\"\nrate = -0.1\n",
    )
    .unwrap();
    let o = weakinv(dir.path(), &["gkls", "--config", "n.toml"]);
    assert_ne!(code(&o), 0);
    assert!(stderr(&o).contains("rate"), "{}", stderr(&o));
}

#[test]
fn gkls_csv_columns() {
    let dir = TempDir::new().unwrap();
    let o = weakinv(
        dir.path(),
        &[
            "gkls",
            "--preset",
            "random",
            "--seed",
            "3",
            "--out",
            "g.csv",
            "--no-timestamp",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(header.get(0), Some("t"));
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert!(rows.iter().all(|r| r.len() == header.len()));
    let t_last: f64 = rows.last().unwrap()[0].parse().unwrap();
    assert_eq!(t_last, 1.0);
}

#[test]
fn dephasing_summary_matches_closed_form_rate() {
    let dir = TempDir::new().unwrap();
    let o = weakinv(dir.path(), &["gkls", "--out", "d.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = summary(&dir.path().join("d.json"));
    // coherence decays as exp(-4ct), so Var(sigma_x) grows at 8c = 2 from |+>
    let rate = s["variance_rate_t0"][0].as_f64().unwrap();
    assert!((rate - 2.0).abs() < 1e-12, "{rate}");
}

#[test]
fn kraus_study_presets_pass() {
    let dir = TempDir::new().unwrap();
    for preset in ["dephasing", "trivial", "unitary"] {
        let o = weakinv(dir.path(), &["kraus-study", "--preset", preset]);
        assert_eq!(code(&o), 0, "{preset}: {}", stderr(&o));
    }
}
