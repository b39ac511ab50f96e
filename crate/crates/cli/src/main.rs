// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weakinv_cli::{config, execute, exit, exit_code, Kind, RunOptions};

/// Audits of weak invariants, entropy growth and GKLS dynamics.
#[derive(Debug, Parser)]
#[command(name = "weakinv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Variance growth along random channel chains.
    ChannelAudit(Flags),
    /// Entropy monotonicity under unital and non-unital channels.
    EntropyAudit(Flags),
    /// GKLS trajectory with co-evolved invariants.
    Gkls(Flags),
    /// Time-dependent oscillator cross-validation.
    Oscillator(Flags),
    /// Scaling of the short-time Kraus step.
    KrausStudy(Flags),
    /// List the presets of each subcommand.
    Presets,
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML scenario file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named preset, applied on top of the config file.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Overrides the seed of seeded scenarios.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// CSV output; the JSON summary goes next to it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Omit the timestamp comment line from the CSV.
    #[arg(long)]
    no_timestamp: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match cli.command {
        Command::ChannelAudit(f) => (Kind::ChannelAudit, f),
        Command::EntropyAudit(f) => (Kind::EntropyAudit, f),
        Command::Gkls(f) => (Kind::Gkls, f),
        Command::Oscillator(f) => (Kind::Oscillator, f),
        Command::KrausStudy(f) => (Kind::KrausStudy, f),
        Command::Presets => {
            for kind in Kind::ALL {
                println!("{}: {}", kind.name(), config::presets(kind).join(", "));
            }
            return ExitCode::SUCCESS;
        }
    };
    let opts = RunOptions {
        config: flags.config,
        preset: flags.preset,
        seed: flags.seed,
        out: flags.out,
        timestamp: !flags.no_timestamp,
    };
    let code = match execute(kind, &opts) {
        Ok((report, written)) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            println!(
                "{} {}: wrote {} and {}",
                kind.name(),
                if report.passed() { "passed" } else { "FAILED" },
                written.csv.display(),
                written.json.display()
            );
            if report.passed() {
                exit::PASS
            } else {
                exit::VIOLATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
