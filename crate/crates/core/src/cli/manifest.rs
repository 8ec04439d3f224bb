use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::integrate::RNG_ALGORITHM;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one experiment run, written next to its outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    /// Every resolved parameter, defaults included.
    pub parameters: Value,
    pub seed: u64,
    pub rng_algorithm: String,
    pub version: String,
    /// Arguments that reproduce the run, excluding the program name.
    pub command_line: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(experiment: &str, parameters: Value, seed: u64, command_line: Vec<String>) -> Self {
        RunManifest {
            experiment: experiment.into(),
            parameters,
            seed,
            rng_algorithm: RNG_ALGORITHM.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command_line,
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
            notes: Vec::new(),
        }
    }

    /// Write `manifest.json` into `dir` via a temporary file and rename, so
    /// readers never see a partial manifest.
    pub fn write_atomic(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let mut body = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        body.push('\n');
        fs::write(&tmp, body)?;
        fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text).map_err(std::io::Error::other)?)
    }
}
