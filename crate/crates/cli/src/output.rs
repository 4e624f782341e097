//! Output directory, atomic writes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Writes `contents` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub code_version: &'static str,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<String>,
    /// Named absolute error bounds reported by the computations.
    pub error_bounds: BTreeMap<String, f64>,
}

/// Collects the files of one run and writes the manifest last.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn start(dir: &Path, command: &str, config: serde_json::Value) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                config,
                code_version: env!("CARGO_PKG_VERSION"),
                started: now(),
                finished: 0.0,
                outputs: Vec::new(),
                error_bounds: BTreeMap::new(),
            },
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn error_bound(&mut self, name: &str, value: f64) {
        self.manifest.error_bounds.insert(name.to_string(), value);
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.manifest.finished = now();
        let path = self.dir.join(MANIFEST_NAME);
        let json = serde_json::to_string_pretty(&self.manifest)?;
        write_atomic(&path, json.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_outputs() {
        let dir = std::env::temp_dir().join(format!("permuton-run-{}", std::process::id()));
        let mut run = Run::start(&dir, "roots", serde_json::json!({"d_max": 3})).unwrap();
        run.write("a.csv", "x\n1\n").unwrap();
        run.error_bound("window", 1e-15);
        let path = run.finish().unwrap();
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(m["outputs"][0], "a.csv");
        assert_eq!(m["config"]["d_max"], 3);
        assert!(!dir.join("a.csv.tmp").exists());
        fs::remove_dir_all(dir).unwrap();
    }
}
