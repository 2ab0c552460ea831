//! Output files are rendered in memory and written together once a command
//! has succeeded, so a failing command leaves nothing behind.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub const PROVENANCE_PREFIX: &str = "# provenance: ";

/// A rendered file, path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    /// CSV with a leading `# provenance: {json}` comment line.
    pub fn csv(path: impl Into<PathBuf>, provenance: &serde_json::Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header).expect("writing to memory");
        for r in rows {
            w.write_record(&r).expect("writing to memory");
        }
        let body = w.into_inner().expect("writing to memory");
        let mut bytes = format!("{PROVENANCE_PREFIX}{provenance}\n").into_bytes();
        bytes.extend(body);
        Self { path: path.into(), bytes }
    }

    pub fn json(path: impl Into<PathBuf>, value: &impl serde::Serialize) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serialisable value");
        bytes.push(b'\n');
        Self { path: path.into(), bytes }
    }
}

/// Writes every artifact under `dir`, creating directories as needed.
pub fn commit(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    for a in artifacts {
        let path = dir.join(&a.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, &a.bytes).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

/// Accuracy at three decimals, empty when absent.
pub fn accuracy_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.3}"))
}
