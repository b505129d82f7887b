//! Run manifests written next to every artifact as `<artifact>.manifest.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use amgtune_core::fingerprint::fnv1a;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub name: String,
    /// FNV-1a of the file contents, or the space fingerprint.
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub mode: String,
    pub inputs: Vec<InputRef>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn sidecar(artifact: &Path, suffix: &str) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    sidecar(artifact, ".manifest.json")
}

impl RunManifest {
    pub fn start(command: &str, mode: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            seeds: BTreeMap::new(),
            mode: mode.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: unix_now(),
            finished_unix: 0.0,
        }
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    pub fn input_file(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        self.inputs.push(InputRef {
            name: path.display().to_string(),
            fingerprint: format!("{:016x}", fnv1a(&bytes)),
        });
        Ok(())
    }

    pub fn input(&mut self, name: &str, fingerprint: u64) {
        self.inputs.push(InputRef {
            name: name.to_string(),
            fingerprint: format!("{fingerprint:016x}"),
        });
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes the manifest beside `artifact`.
    pub fn finish(mut self, artifact: &Path) -> std::io::Result<PathBuf> {
        self.finished_unix = unix_now();
        let path = manifest_path(artifact);
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(&path, json + "\n")?;
        Ok(path)
    }
}
