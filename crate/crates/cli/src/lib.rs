// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line runners for the weakinv audits and studies.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Kind, ScenarioConfig};
pub use run::{run, Report};

use std::path::PathBuf;

use weakinv_core::Error;

/// Process exit statuses.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const VIOLATION: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Exit status for an error that stopped a run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => exit::CONFIG,
        Error::Leakage { .. } => exit::VIOLATION,
        _ => exit::NUMERICAL,
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

/// Resolves the scenario: config file (or defaults), then preset, then seed.
pub fn resolve(kind: Kind, opts: &RunOptions) -> weakinv_core::Result<ScenarioConfig> {
    let mut cfg = match &opts.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    cfg.check_kind(kind)?;
    if let Some(name) = &opts.preset {
        cfg.apply_preset(kind, name)?;
    }
    if let Some(seed) = opts.seed {
        cfg.apply_seed(seed);
    }
    Ok(cfg)
}

/// Runs one subcommand and writes its CSV and JSON outputs.
pub fn execute(kind: Kind, opts: &RunOptions) -> weakinv_core::Result<(Report, output::Written)> {
    let cfg = resolve(kind, opts)?;
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    let report = run(kind, &cfg)?;
    let written = output::write(&report, &out, opts.timestamp)?;
    Ok((report, written))
}
