//! Run manifests: one JSON document per invocation, recording everything
//! needed to replay it (`svrp` plus `argv[1..]` reruns the command).

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::Failure;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    /// Subcommand that ran.
    pub command: String,
    /// Raw argument vector as invoked.
    pub argv: Vec<String>,
    /// Structured copy of every parameter after defaulting.
    pub parameters: serde_json::Value,
    /// Seed governing the command's randomness, if it uses any.
    pub seed: Option<u64>,
    pub code_version: String,
    pub wall_time_seconds: f64,
    /// Files written, in writing order.
    pub outputs: Vec<String>,
    /// Progress notes: phase transitions, restart summaries, checks.
    pub notes: Vec<String>,
}

/// Collects manifest content while a command runs.
pub struct ManifestBuilder {
    command: &'static str,
    parameters: serde_json::Value,
    seed: Option<u64>,
    started: Instant,
    outputs: Vec<String>,
    notes: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(command: &'static str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        ManifestBuilder {
            command,
            parameters: serde_json::to_value(parameters).unwrap_or(serde_json::Value::Null),
            seed,
            started: Instant::now(),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn note(&mut self, message: impl Into<String>) {
        self.notes.push(message.into());
    }

    /// Writes the manifest to `path`, or prints it to stderr when the
    /// command produced no natural place for it.
    pub fn emit(self, path: Option<&PathBuf>) -> Result<(), Failure> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            argv: std::env::args().collect(),
            parameters: self.parameters,
            seed: self.seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
            notes: self.notes,
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Failure::Internal(format!("cannot serialize the run manifest: {e}")))?;
        match path {
            Some(p) => std::fs::write(p, json + "\n")
                .map_err(|e| Failure::Internal(format!("cannot write manifest {}: {e}", p.display()))),
            None => {
                eprintln!("{json}");
                Ok(())
            }
        }
    }
}
