//! Machine-readable run report.

use std::path::Path;

use serde::Serialize;

use crate::check::Check;
use crate::config::RunConfig;
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub malab: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Versions {
            malab: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Everything a run decides; identical configurations give identical payloads.
#[derive(Debug, Clone, Serialize)]
pub struct Payload {
    pub command: String,
    pub config: RunConfig,
    pub versions: Versions,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Command-specific results.
    pub details: serde_json::Value,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub payload: Payload,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.payload.passed
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.payload.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.payload
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// The payload alone, pretty-printed.
    pub fn payload_json(&self) -> String {
        serde_json::to_string_pretty(&self.payload).expect("payload serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
