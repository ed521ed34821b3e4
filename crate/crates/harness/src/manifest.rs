//! Output directories, atomic writes and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{LabError, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Ran to the end but a hard assertion failed.
    AssertionFailed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub started: String,
    pub finished: String,
    /// Paths relative to the output directory.
    pub files: Vec<String>,
    pub status: RunStatus,
    pub summary: Vec<String>,
}

/// SHA-256 of the config as JSON with sorted keys.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    // serde_json::Value keeps object keys ordered, so field order cannot leak in
    let v = serde_json::to_value(cfg)?;
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(&v)?)))
}

/// Write to a sibling temporary file, then rename over the target.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| LabError::Usage(format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// A run's output directory and the files written into it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    /// Refuses a non-empty directory unless `force`.
    pub fn create(root: &Path, force: bool) -> Result<Self> {
        if root.exists() {
            let nonempty = fs::read_dir(root)?.next().is_some();
            if nonempty && !force {
                return Err(LabError::OutputExists(root.to_path_buf()));
            }
        } else {
            fs::create_dir_all(root)?;
        }
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.path(name);
        write_atomic(&p, contents.as_bytes())?;
        self.record(name);
        Ok(p)
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn finish(
        self,
        command: &str,
        cfg: &RunConfig,
        started: String,
        status: RunStatus,
        summary: Vec<String>,
    ) -> Result<RunManifest> {
        let m = RunManifest {
            command: command.to_string(),
            config_hash: config_hash(cfg)?,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started,
            finished: now(),
            files: self.files,
            status,
            summary,
        };
        write_atomic(&self.root.join(MANIFEST_NAME), serde_json::to_string_pretty(&m)?.as_bytes())?;
        Ok(m)
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn hash_ignores_key_order() {
        let a = parse_config("seed = 3\n[integrator]\ndt = 0.002\nt_end = 0.5\n").unwrap();
        let b = parse_config("[integrator]\nt_end = 0.5\ndt = 0.002\n[grid]\n\n").unwrap();
        let b = RunConfig { seed: 3, ..b };
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        let c = RunConfig { seed: 4, ..b };
        assert_ne!(config_hash(&a).unwrap(), config_hash(&c).unwrap());
    }

    #[test]
    fn refuses_nonempty_without_force() {
        let d = tempfile::tempdir().unwrap();
        let mut o = OutputDir::create(d.path(), false).unwrap();
        o.write("a.txt", "x").unwrap();
        let m = o.finish("t", &RunConfig::default(), now(), RunStatus::Completed, vec![]).unwrap();
        assert_eq!(m.files, vec!["a.txt".to_string()]);
        assert!(matches!(OutputDir::create(d.path(), false), Err(LabError::OutputExists(_))));
        assert!(OutputDir::create(d.path(), true).is_ok());
        let back: RunManifest =
            serde_json::from_str(&fs::read_to_string(d.path().join(MANIFEST_NAME)).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
