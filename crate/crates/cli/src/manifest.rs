use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const FILE_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Timing {
    pub item: String,
    pub ms: f64,
}

/// Record of one run. `config` is the full argument set and is enough to
/// reproduce every file in `outputs` bit for bit; `timings` naturally differ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub config: Command,
    pub seed: Option<u64>,
    pub version: String,
    pub timings: Vec<Timing>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

/// Collects outputs and timings while a command runs.
#[derive(Debug, Default)]
pub struct Recorder {
    pub timings: Vec<Timing>,
    pub outputs: Vec<String>,
}

impl Recorder {
    pub fn time<T>(&mut self, item: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let value = f();
        self.timings.push(Timing { item: item.into(), ms: start.elapsed().as_secs_f64() * 1e3 });
        value
    }

    /// Writes `bytes` to `dir/name` and lists it as an output.
    pub fn write(&mut self, dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(CliError::io(&path))?;
        self.outputs.push(name.to_owned());
        Ok(path)
    }

    pub fn finish(self, config: &Command, dir: &Path) -> Result<(), CliError> {
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            command: config.name().to_owned(),
            config: config.clone(),
            seed: config.seed(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timings: self.timings,
            outputs: self.outputs,
        };
        let path = dir.join(FILE_NAME);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(&path, text).map_err(CliError::io(&path))
    }
}

pub fn load(path: &Path) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "manifest schema version {} is not supported (expected {SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }
    Ok(manifest)
}
