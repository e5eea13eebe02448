use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

/// One named pass/fail check inside a run.
#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

/// Self-describing record of a run: the resolved configuration, the seed and
/// worker count that make outputs reproducible, the files written, and the
/// verdict of every assertion.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub workers: u64,
    pub wall_time_secs: f64,
    pub outputs: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
}

pub struct RunRecorder {
    command: String,
    config: serde_json::Value,
    seed: u64,
    workers: u64,
    out_dir: PathBuf,
    outputs: Vec<String>,
    assertions: Vec<Assertion>,
    started: Instant,
}

impl RunRecorder {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        seed: u64,
        workers: u64,
        out_dir: &Path,
    ) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(RunRecorder {
            command: command.to_string(),
            config,
            seed,
            workers,
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
            assertions: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn check(&mut self, name: &str, pass: bool, details: impl Into<String>) {
        let details = details.into();
        let verdict = if pass { "pass" } else { "FAIL" };
        println!("[{verdict}] {name}: {details}");
        self.assertions.push(Assertion {
            name: name.to_string(),
            pass,
            details,
        });
    }

    pub fn write_file(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    /// Writes the manifest and returns the process exit code.
    pub fn finish(mut self) -> Result<i32> {
        let pass = self.assertions.iter().all(|a| a.pass);
        let manifest = RunManifest {
            command: self.command.clone(),
            version: format!("kofn {}", env!("CARGO_PKG_VERSION")),
            config: self.config.clone(),
            seed: self.seed,
            workers: self.workers,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            outputs: std::mem::take(&mut self.outputs),
            assertions: std::mem::take(&mut self.assertions),
            pass,
        };
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        println!(
            "{}: {} ({} assertions) -> {}",
            manifest.command,
            if pass { "PASS" } else { "FAIL" },
            manifest.assertions.len(),
            path.display()
        );
        Ok(if pass { 0 } else { 1 })
    }
}
