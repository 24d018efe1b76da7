//! Output directory, written files and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use pwl_lorenz::export::Table;
use serde::Serialize;
use serde_json::{json, Value};

pub const MANIFEST: &str = "manifest.json";

/// Collects the files of one run under a single directory.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    tolerances: BTreeMap<String, Value>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            tolerances: BTreeMap::new(),
        })
    }

    pub fn tolerance(&mut self, name: &str, v: f64) {
        self.tolerances.insert(name.to_string(), json!(v));
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let csv = t.to_csv()?;
        self.write(name, csv.as_bytes())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes the manifest; `timestamp` is the only field that varies
    /// between identical runs.
    pub fn finish(&mut self, command: &str, echo: Value, threads: usize) -> Result<()> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = json!({
            "tool": "pwlorenz",
            "version": env!("CARGO_PKG_VERSION"),
            "library": {"name": "pwl-lorenz", "version": pwl_lorenz::VERSION},
            "command": command,
            "config": echo,
            "threads": threads,
            "tolerances": self.tolerances,
            "outputs": self.files,
            "timestamp": timestamp,
        });
        let mut s = serde_json::to_string_pretty(&manifest)?;
        s.push('\n');
        let path = self.dir.join(MANIFEST);
        fs::write(&path, s).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
