use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::output::{atomic_write, sibling};

/// Record written next to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Arguments after the program name; `replay` parses them again.
    pub argv: Vec<String>,
    pub parameters: Value,
    pub version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<PathBuf>,
    /// Seconds per phase.
    pub timings: Vec<(String, f64)>,
    /// Command-specific summary numbers.
    pub summary: Value,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, ".manifest.json")
}

pub struct Timer {
    start: Instant,
    pub phases: Vec<(String, f64)>,
}

impl Timer {
    pub fn new() -> Self {
        Self {
            start: Instant::now(),
            phases: Vec::new(),
        }
    }

    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.phases
            .push((name.to_string(), (now - self.start).as_secs_f64()));
        self.start = now;
    }
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        argv: &[String],
        parameters: impl Serialize,
        seed: Option<u64>,
    ) -> anyhow::Result<Self> {
        Ok(Self {
            subcommand: subcommand.to_string(),
            argv: argv.to_vec(),
            parameters: serde_json::to_value(parameters)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            outputs: Vec::new(),
            timings: Vec::new(),
            summary: Value::Null,
        })
    }

    pub fn save(&self, out: &Path) -> anyhow::Result<()> {
        atomic_write(&manifest_path(out), |w| {
            serde_json::to_writer_pretty(&mut *w, self)?;
            Ok(())
        })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
