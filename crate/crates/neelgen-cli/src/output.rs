//! Artifact writing with checksum tracking. Every file is built in memory,
//! written once, and recorded as name -> SHA-256 so the manifest can attest
//! byte-level reproducibility. Floats are formatted with Rust's shortest
//! round-trip `Display`, which is deterministic.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{runtime, validation, CliError};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Artifacts {
    dir: PathBuf,
    outputs: BTreeMap<String, String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| validation(format!("output dir {}: {e}", dir.display())))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.path(name), bytes).map_err(runtime)?;
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(runtime)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// One compact JSON object per line.
    pub fn write_jsonl<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut buf = String::new();
        for row in rows {
            buf.push_str(&serde_json::to_string(row).map_err(runtime)?);
            buf.push('\n');
        }
        self.write_bytes(name, buf.as_bytes())
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(runtime)?;
        for row in rows {
            w.write_record(&row).map_err(runtime)?;
        }
        let bytes = w.into_inner().map_err(|e| runtime(e.into_error()))?;
        self.write_bytes(name, &bytes)
    }

    /// Checksum a file some other component wrote into the artifact dir
    /// (e.g. the binary state dump and its sidecar).
    pub fn record_existing(&mut self, name: &str) -> Result<(), CliError> {
        let bytes = std::fs::read(self.path(name)).map_err(runtime)?;
        self.outputs.insert(name.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Write manifest.json and hand back the checksum map.
    pub fn finish(
        mut self,
        scenario: &str,
        config_hash: &str,
        seed: Option<u64>,
        lattice: serde_json::Value,
    ) -> Result<BTreeMap<String, String>, CliError> {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = serde_json::json!({
            "code_version": env!("CARGO_PKG_VERSION"),
            "created_unix": created,
            "scenario": scenario,
            "config_hash": config_hash,
            "seed": seed,
            "lattice": lattice,
            "outputs": self.outputs,
        });
        let mut text = serde_json::to_string_pretty(&manifest).map_err(runtime)?;
        text.push('\n');
        std::fs::write(self.path("manifest.json"), text).map_err(runtime)?;
        Ok(std::mem::take(&mut self.outputs))
    }
}

/// Shortest round-trip float column.
pub fn f(x: f64) -> String {
    format!("{x}")
}
