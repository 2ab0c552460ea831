//! Recording CSV (long format, one row per sample per sensor) and the
//! `manifest.csv` that names the subject of each recording file.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use gaitid_core::gait_data::{check_stream, infer_sample_rate, Dataset, ImuSample, Recording, SensorId, StreamFault};
use serde::Deserialize;

use crate::artifact::Artifact;
use crate::error::{CliError, Result};

pub const RECORDING_HEADER: [&str; 8] = ["time_s", "sensor", "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z"];
pub const MANIFEST_HEADER: [&str; 2] = ["subject_id", "path"];
pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Debug, Deserialize)]
struct Row {
    time_s: f64,
    sensor: String,
    acc_x: f64,
    acc_y: f64,
    acc_z: f64,
    gyro_x: f64,
    gyro_y: f64,
    gyro_z: f64,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r)
}

fn read_header<R: Read>(rdr: &mut csv::Reader<R>, path: &Path, expected: &[&str]) -> Result<csv::StringRecord> {
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(CliError::format(path, format!("expected header {}", expected.join(","))));
    }
    Ok(header)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let row = e.position().map(|p| p.line());
    if let csv::ErrorKind::Io(_) = e.kind() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return CliError::io(path, io);
        }
        unreachable!("kind checked above");
    }
    match row {
        Some(row) => CliError::Row { path: path.to_path_buf(), row, message: e.to_string() },
        None => CliError::format(path, e.to_string()),
    }
}

fn row_error(path: &Path, row: u64, message: impl Into<String>) -> CliError {
    CliError::Row { path: path.to_path_buf(), row, message: message.into() }
}

/// Reads a recording. Rows may come in any order; each sensor's rows are
/// sorted by time. Without `sample_rate_hz` the rate is the inverse median
/// sample spacing of the pelvis stream. Errors name the file line (the
/// header is line 1).
pub fn load_recording(path: &Path, subject_id: &str, sample_rate_hz: Option<f64>) -> Result<Recording> {
    let mut rdr = reader(open(path)?);
    let header = read_header(&mut rdr, path, &RECORDING_HEADER)?;
    let mut streams: [Vec<(u64, ImuSample)>; 3] = Default::default();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record.deserialize(Some(&header)).map_err(|e| row_error(path, line, e.to_string()))?;
        let sensor: SensorId =
            row.sensor.parse().map_err(|_| row_error(path, line, format!("unknown sensor {:?}", row.sensor)))?;
        let sample = ImuSample { t: row.time_s, acc: [row.acc_x, row.acc_y, row.acc_z], gyro: [row.gyro_x, row.gyro_y, row.gyro_z] };
        if !sample.is_finite() {
            return Err(row_error(path, line, "non-finite value"));
        }
        streams[sensor.index()].push((line, sample));
    }
    for s in &mut streams {
        s.sort_by(|a, b| a.1.t.total_cmp(&b.1.t));
    }
    for sensor in SensorId::ALL {
        if streams[sensor.index()].is_empty() {
            return Err(CliError::format(path, format!("sensor stream absent: {sensor}")));
        }
    }
    let samples: [Vec<ImuSample>; 3] = std::array::from_fn(|i| streams[i].iter().map(|r| r.1).collect());
    let rate = match sample_rate_hz {
        Some(r) => r,
        None => infer_sample_rate(&samples[SensorId::Pelvis.index()])
            .ok_or_else(|| CliError::format(path, "cannot infer the sample rate"))?,
    };
    for sensor in SensorId::ALL {
        let rows = &streams[sensor.index()];
        if let Err(fault) = check_stream(&samples[sensor.index()], rate) {
            let index = match fault {
                StreamFault::Empty => 0,
                StreamFault::NonFinite { index } | StreamFault::NonMonotone { index } | StreamFault::Jitter { index, .. } => index,
            };
            return Err(row_error(path, rows[index].0, format!("{sensor}: {fault}")));
        }
    }
    Recording::new(subject_id, rate, samples).map_err(|e| CliError::format(path, e.to_string()))
}

/// Recording as CSV, sensors in `pelvis, left_foot, right_foot` order.
/// Values are written in shortest round-trip form.
pub fn recording_csv(rec: &Recording) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for sensor in SensorId::ALL {
        for s in rec.stream(sensor) {
            let mut row = vec![s.t.to_string(), sensor.as_str().to_string()];
            row.extend(s.acc.iter().chain(&s.gyro).map(f64::to_string));
            rows.push(row);
        }
    }
    rows
}

pub fn recording_artifact(path: impl Into<PathBuf>, rec: &Recording, provenance: &serde_json::Value) -> Artifact {
    Artifact::csv(path, provenance, &RECORDING_HEADER, recording_csv(rec))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub subject_id: String,
    /// As written in the manifest, relative to its directory.
    pub path: String,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut rdr = reader(open(path)?);
    read_header(&mut rdr, path, &MANIFEST_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let (subject_id, file) = (rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
        if subject_id.is_empty() || file.is_empty() {
            return Err(row_error(path, line, "empty subject_id or path"));
        }
        out.push(ManifestEntry { subject_id: subject_id.to_string(), path: file.to_string() });
    }
    if out.is_empty() {
        return Err(CliError::format(path, "manifest lists no recordings"));
    }
    Ok(out)
}

pub fn manifest_artifact(path: impl Into<PathBuf>, entries: &[ManifestEntry], provenance: &serde_json::Value) -> Artifact {
    let rows = entries.iter().map(|e| vec![e.subject_id.clone(), e.path.clone()]).collect();
    Artifact::csv(path, provenance, &MANIFEST_HEADER, rows)
}

/// Where recordings come from: a manifest (or a directory holding
/// `manifest.csv`), or one file with its subject.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Manifest(PathBuf),
    Single { path: PathBuf, subject_id: String },
}

/// A loaded dataset with the file each recording came from.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub entries: Vec<ManifestEntry>,
}

impl LoadedData {
    /// File stem of recording `i`.
    pub fn stem(&self, i: usize) -> String {
        Path::new(&self.entries[i].path)
            .file_stem()
            .map_or_else(|| format!("recording{i}"), |s| s.to_string_lossy().into_owned())
    }
}

pub fn load_data(source: &DataSource, sample_rate_hz: Option<f64>) -> Result<LoadedData> {
    match source {
        DataSource::Single { path, subject_id } => {
            let rec = load_recording(path, subject_id, sample_rate_hz)?;
            let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            Ok(LoadedData {
                dataset: Dataset::new(vec![rec]),
                entries: vec![ManifestEntry { subject_id: subject_id.clone(), path: name }],
            })
        }
        DataSource::Manifest(p) => {
            let manifest = if p.is_dir() { p.join(MANIFEST_FILE) } else { p.clone() };
            let entries = read_manifest(&manifest)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let recordings = entries
                .iter()
                .map(|e| load_recording(&base.join(&e.path), &e.subject_id, sample_rate_hz))
                .collect::<Result<Vec<_>>>()?;
            Ok(LoadedData { dataset: Dataset::new(recordings), entries })
        }
    }
}
