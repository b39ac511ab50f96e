// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use weakinv_core::{Error, Result};

use crate::run::Report;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Sidecar path for the JSON summary of `csv`.
pub fn json_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `report` to `out` and its summary next to it. With `timestamp`
/// the CSV starts with a `# generated_unix=<secs>` comment line.
pub fn write(report: &Report, out: &Path, timestamp: bool) -> Result<Written> {
    let json = json_path(out);
    if json == out {
        return Err(Error::Config(format!(
            "output {} would collide with its JSON summary",
            out.display()
        )));
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut body = Vec::with_capacity(report.csv.len() + 32);
    if timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        body.extend_from_slice(format!("# generated_unix={secs}\n").as_bytes());
    }
    body.extend_from_slice(&report.csv);
    fs::write(out, body)?;
    let mut text = serde_json::to_string_pretty(&report.summary_json())?;
    text.push('\n');
    fs::write(&json, text)?;
    Ok(Written {
        csv: out.to_path_buf(),
        json,
    })
}
