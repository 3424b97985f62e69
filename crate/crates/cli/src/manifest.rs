use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::files::{sha256_file, write_atomic};

pub const MANIFEST_NAME: &str = "manifest.toml";

/// Record of one simulation run and the analyses run on it. Paths are
/// relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub duration_s: f64,
    /// Wall-clock seconds spent simulating; the only field that varies
    /// between identical runs.
    pub runtime_s: f64,
    pub config: ExperimentConfig,
    pub files: Vec<TagFile>,
    #[serde(default)]
    pub results: Vec<ResultFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagFile {
    /// `spd1`..`spd4`, or `signal`/`idler` for the characterization run.
    pub role: String,
    pub channel: u8,
    pub path: String,
    pub tags: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub analysis: String,
    pub path: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: RunManifest = toml::from_str(&text).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.message())))?;
        m.config.validate()?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, dir))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, toml::to_string(self).expect("manifest serializes").as_bytes())
    }

    pub fn file(&self, role: &str) -> Option<&TagFile> {
        self.files.iter().find(|f| f.role == role)
    }

    /// Replaces any earlier entries for `analysis` with the given files.
    pub fn record_results(&mut self, analysis: &str, dir: &Path, paths: &[String]) -> Result<(), CliError> {
        self.results.retain(|r| r.analysis != analysis);
        for p in paths {
            let sha256 = sha256_file(&dir.join(p))?;
            self.results.push(ResultFile { analysis: analysis.to_string(), path: p.clone(), sha256 });
        }
        self.results.sort_by(|a, b| (&a.analysis, &a.path).cmp(&(&b.analysis, &b.path)));
        Ok(())
    }

    /// Verifies a recorded checksum against the file on disk.
    pub fn check(dir: &Path, rel: &str, sha256: &str) -> Result<(), CliError> {
        let actual = sha256_file(&dir.join(rel))?;
        if actual != sha256 {
            return Err(CliError::Io(format!("checksum mismatch for {rel}: manifest {sha256}, file {actual}")));
        }
        Ok(())
    }
}
