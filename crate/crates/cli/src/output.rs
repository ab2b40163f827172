//! Output directory handling and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const CONFIG_NAME: &str = "run_config.toml";

/// Files produced by a command, in the order they are written.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    /// Points that failed inside an otherwise completed run.
    pub partial_failures: Vec<String>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.push((name.into(), body.into()));
    }

    pub fn add_json(&mut self, name: impl Into<String>, value: &serde_json::Value) {
        let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
        s.push('\n');
        self.add(name, s);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }
}

#[derive(Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    config: &'a RunConfig,
    wall_seconds: f64,
    outputs: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Write every output plus the resolved config, then the manifest last.
pub fn commit(dir: &Path, config: &RunConfig, outputs: &Outputs, started: Instant) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut entries = Vec::with_capacity(outputs.files.len() + 1);
    let cfg = config.to_toml();
    let all = outputs.files.iter().map(|(n, b)| (n.as_str(), b.as_slice())).chain(std::iter::once((CONFIG_NAME, cfg.as_bytes())));
    for (name, bytes) in all {
        write(&dir.join(name), bytes)?;
        entries.push(FileEntry { path: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
    }
    let manifest = RunManifest {
        tool: "otoc-lab",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: config.subcommand.as_deref().unwrap_or(""),
        config,
        wall_seconds: started.elapsed().as_secs_f64(),
        outputs: entries,
    };
    let path = dir.join(MANIFEST_NAME);
    let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    s.push('\n');
    write(&path, s.as_bytes())?;
    Ok(path)
}
