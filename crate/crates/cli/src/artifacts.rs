//! Output staging. A stage collects every file in memory and writes them
//! only after it has succeeded, so a failure never leaves partial output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, StageExt};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Everything needed to reproduce a stage's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub stage: &'static str,
    pub seed: Option<u64>,
    pub parameter_hash: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub struct Artifacts {
    stage: &'static str,
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
    inputs: Vec<FileDigest>,
}

impl Artifacts {
    pub fn new(stage: &'static str, dir: impl Into<PathBuf>) -> Self {
        Artifacts { stage, dir: dir.into(), files: Vec::new(), inputs: Vec::new() }
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::validation(self.stage, format!("{}: {e}", path.display())))?;
        self.note_input(path, &bytes);
        Ok(bytes)
    }

    pub fn read_input_string(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = self.read_input(path)?;
        String::from_utf8(bytes).map_err(|_| CliError::validation(self.stage, format!("{} is not UTF-8", path.display())))
    }

    pub fn note_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest { path: path.display().to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).stage(self.stage)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    /// Writes all files plus `<stage>.manifest.json` and returns the paths
    /// written, manifest last.
    pub fn commit<P: Serialize>(self, seed: Option<u64>, parameters: &P) -> Result<Vec<PathBuf>, CliError> {
        let stage = self.stage;
        let parameters = serde_json::to_value(parameters).stage(stage)?;
        let canonical = serde_json::to_vec(&parameters).stage(stage)?;
        let outputs = self
            .files
            .iter()
            .map(|(name, b)| FileDigest { path: name.clone(), bytes: b.len(), sha256: sha256_hex(b) })
            .collect();
        let manifest = Manifest {
            tool: "spescreen",
            version: env!("CARGO_PKG_VERSION"),
            core_version: spescreen_core::VERSION,
            stage,
            seed,
            parameter_hash: sha256_hex(&canonical),
            parameters,
            inputs: self.inputs,
            outputs,
        };
        let mut files = self.files;
        let mut text = serde_json::to_string_pretty(&manifest).stage(stage)?;
        text.push('\n');
        files.push((format!("{stage}.manifest.json"), text.into_bytes()));

        fs::create_dir_all(&self.dir).map_err(|e| CliError::validation(stage, format!("{}: {e}", self.dir.display())))?;
        let mut staged = Vec::new();
        for (name, bytes) in &files {
            let tmp = self.dir.join(format!(".{name}.partial"));
            if let Err(e) = fs::write(&tmp, bytes) {
                for t in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(CliError::validation(stage, format!("{}: {e}", tmp.display())));
            }
            staged.push(tmp);
        }
        let mut written = Vec::new();
        for ((name, _), tmp) in files.iter().zip(&staged) {
            let dst = self.dir.join(name);
            fs::rename(tmp, &dst).map_err(|e| CliError::validation(stage, format!("{}: {e}", dst.display())))?;
            written.push(dst);
        }
        Ok(written)
    }
}

/// CSV text from a header and rows of already formatted cells.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).stage("csv")?;
    for r in rows {
        w.write_record(&r).stage("csv")?;
    }
    w.into_inner().map_err(|e| CliError::validation("csv", e.to_string()))
}

/// Shortest round-tripping decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
