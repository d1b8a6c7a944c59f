//! Run directory, atomic file writes and the JSON manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::Result;

/// A pass/fail record with the measured value and the tolerance it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub tolerance: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, passed: bool, measured: impl Into<String>, tolerance: impl Into<String>) -> Self {
        Self { name: name.into(), passed, measured: measured.into(), tolerance: tolerance.into(), detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    /// Seconds since the Unix epoch at the start of the run.
    pub started_at: u64,
    pub wall_clock_seconds: f64,
    pub config: ExperimentConfig,
    pub truncation: Vec<TruncationRecord>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub files: Vec<FileRecord>,
}

impl ExperimentManifest {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Accumulates everything a command produces and writes the manifest last.
pub struct Run {
    pub dir: PathBuf,
    command: String,
    config: ExperimentConfig,
    started: Instant,
    started_at: u64,
    dat: bool,
    pub truncation: Vec<TruncationRecord>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub files: Vec<FileRecord>,
}

impl Run {
    pub fn new(command: &str, config: &ExperimentConfig) -> Result<Self> {
        let dir = PathBuf::from(&config.output.dir);
        std::fs::create_dir_all(&dir)?;
        let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Self {
            dir,
            command: command.to_string(),
            config: config.clone(),
            started: Instant::now(),
            started_at,
            dat: config.output.dat,
            truncation: Vec::new(),
            warnings: Vec::new(),
            checks: Vec::new(),
            files: Vec::new(),
        })
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    pub fn warn_all<'a>(&mut self, ws: impl IntoIterator<Item = &'a String>) {
        for w in ws {
            self.warn(w.clone());
        }
    }

    pub fn truncation(&mut self, label: impl Into<String>, value: f64) {
        self.truncation.push(TruncationRecord { label: label.into(), value });
    }

    pub fn check(&mut self, c: CheckRecord) {
        self.checks.push(c);
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Writes `<name>.csv` (and a `.dat` mirror when enabled). Floats use
    /// Rust's shortest round-trip formatting, so output is reproducible.
    pub fn csv<R: AsRef<[String]>>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.record(&format!("{name}.csv"), &bytes)?;
        if self.dat {
            let mut dat = format!("# {}\n", header.join(" "));
            for r in rows {
                dat.push_str(&r.as_ref().join(" "));
                dat.push('\n');
            }
            self.record(&format!("{name}.dat"), dat.as_bytes())?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<ExperimentManifest> {
        let manifest = ExperimentManifest {
            command: self.command,
            config_hash: self.config.hash(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            config: self.config,
            truncation: self.truncation,
            warnings: self.warnings,
            checks: self.checks,
            files: self.files,
        };
        let json = serde_json::to_vec_pretty(&manifest)?;
        write_atomic(&self.dir.join("manifest.json"), &json)?;
        Ok(manifest)
    }
}

/// Shortest round-trip rendering of a float for CSV cells.
pub fn f(x: f64) -> String {
    format!("{x:?}")
}
