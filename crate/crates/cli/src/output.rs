use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Timing lives in its own object so that two runs of the same command differ
/// only there.
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub config: Value,
    pub version: &'static str,
    pub timing: Timing,
}

pub struct Run {
    command: Vec<String>,
    started: SystemTime,
    clock: Instant,
}

impl Run {
    pub fn start(command: Vec<String>) -> Self {
        Self {
            command,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn manifest(&self, inputs: Vec<PathBuf>, seed: Option<u64>, config: Value) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            inputs,
            seed,
            config,
            version: env!("CARGO_PKG_VERSION"),
            timing: Timing {
                started_unix: self
                    .started
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                elapsed_seconds: self.clock.elapsed().as_secs_f64(),
            },
        }
    }
}

/// A CSV table: header plus rows of already-formatted cells.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn render(manifest: &RunManifest, result: &impl Serialize, table: &Table, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let doc = json!({ "manifest": manifest, "result": result });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let mut out = format!("# manifest {}\n", serde_json::to_string(manifest)?);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            out.push_str(std::str::from_utf8(&w.into_inner()?)?);
            Ok(out)
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    print!("{text}");
    if let Some(path) = out {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
