//! Subcommands. Each one loads its inputs, computes everything in memory and
//! only then writes its artifacts.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gaitid_core::classifiers::{train, ClassifierKind, ClassifierSpec, LabeledSet};
use gaitid_core::evaluation::{run_grid, GridSpec};
use gaitid_core::features::{MinMaxScaler, SensorConfig};
use gaitid_core::pipeline::{analyze_dataset, analyze_recording, DatasetAnalysis, PipelineConfig};
use gaitid_core::rng::derive_seed;
use gaitid_core::segmentation::Interval;
use gaitid_core::synth::{duration_for_strides, generate_profiles, synthesize_recording};
use serde_json::{json, Value};

use crate::artifact::{commit, Artifact};
use crate::error::{CliError, Result};
use crate::formats::{load_data, manifest_artifact, recording_artifact, DataSource, LoadedData, ManifestEntry, MANIFEST_FILE};
use crate::model::SavedModel;
use crate::tables;

pub const REPORT_FILE: &str = "report.json";
pub const GRID_FILE: &str = "accuracy_grid.csv";

#[derive(Debug, Parser)]
#[command(name = "gaitid", version, about = "Gait-based person identification from pelvis and foot IMU recordings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic walking recordings with exact ground-truth events.
    Synth(SynthArgs),
    /// Detect heel strikes and toe-offs of both feet.
    Events(EventsArgs),
    /// Segment strides into DLS1, SLS, DLS2 and SWING.
    Segment(SegmentArgs),
    /// Extract per-stride feature vectors.
    Features(FeaturesArgs),
    /// Fit one classifier on every stride of a dataset and save it.
    Train(TrainArgs),
    /// Cross-validate classifiers over sensor configurations and intervals.
    Evaluate(EvaluateArgs),
    /// Turn an evaluation report into plot-ready CSV tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of subjects (at least 2).
    #[arg(long)]
    pub subjects: usize,
    /// Usable strides per subject and reference foot.
    #[arg(long, default_value_t = 10)]
    pub strides: usize,
    /// Relative noise level, 0 to 0.2.
    #[arg(long, default_value_t = gaitid_core::synth::DEFAULT_NOISE)]
    pub noise: f64,
    /// Sample rate of the generated recordings, Hz.
    #[arg(long, default_value_t = 1000.0)]
    pub rate: f64,
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Manifest CSV (`subject_id,path`) or a directory containing
    /// `manifest.csv`.
    #[arg(long, conflicts_with = "recording")]
    pub manifest: Option<PathBuf>,
    /// A single recording CSV; needs `--subject`.
    #[arg(long, requires = "subject")]
    pub recording: Option<PathBuf>,
    /// Subject label of `--recording`.
    #[arg(long)]
    pub subject: Option<String>,
    /// Sample rate, Hz. Inferred from the timestamps when omitted.
    #[arg(long)]
    pub rate: Option<f64>,
}

impl InputArgs {
    fn source(&self) -> Result<DataSource> {
        match (&self.manifest, &self.recording, &self.subject) {
            (Some(m), None, _) => Ok(DataSource::Manifest(m.clone())),
            (None, Some(r), Some(s)) => Ok(DataSource::Single { path: r.clone(), subject_id: s.clone() }),
            _ => Err(CliError::Usage("give --manifest, or --recording with --subject".into())),
        }
    }

    fn load(&self) -> Result<LoadedData> {
        if let Some(r) = self.rate {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Usage(format!("--rate {r} is not a positive number")));
            }
        }
        load_data(&self.source()?, self.rate)
    }
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Butterworth order of the band-pass filter.
    #[arg(long, default_value_t = 3)]
    pub filter_order: usize,
    /// Lower cut-off, Hz.
    #[arg(long, default_value_t = 0.5)]
    pub low_hz: f64,
    /// Upper cut-off, Hz.
    #[arg(long, default_value_t = 15.0)]
    pub high_hz: f64,
}

impl FilterArgs {
    fn pipeline(&self) -> PipelineConfig {
        PipelineConfig { filter_order: self.filter_order, low_cut_hz: self.low_hz, high_cut_hz: self.high_hz, ..Default::default() }
    }
}

#[derive(Debug, Args)]
pub struct EventsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Output directory; one `<recording>.events.csv` per recording.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Output directory for `segments.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// FOOT, PELVIS or FOOT_PLUS_PELVIS.
    #[arg(long, default_value = "FOOT_PLUS_PELVIS")]
    pub config: SensorConfig,
    /// DLS1, SLS, DLS2, SWING, STEP, STANCE or STRIDE.
    #[arg(long, default_value = "STRIDE")]
    pub interval: Interval,
    /// Output directory for `features.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnnArgs {
    /// Training epochs of the network.
    #[arg(long)]
    pub ann_epochs: Option<usize>,
    /// Mini-batch size of the network.
    #[arg(long)]
    pub ann_batch: Option<usize>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ann_hidden: Option<Vec<usize>>,
}

impl AnnArgs {
    fn apply(&self, spec: ClassifierSpec) -> ClassifierSpec {
        match spec {
            ClassifierSpec::Ann(mut p) => {
                if let Some(e) = self.ann_epochs {
                    p.epochs = e;
                }
                if let Some(b) = self.ann_batch {
                    p.batch_size = b;
                }
                if let Some(h) = &self.ann_hidden {
                    p.hidden = h.clone();
                }
                ClassifierSpec::Ann(p)
            }
            other => other,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// knn, svm, dt, rf, nb or ann.
    #[arg(long)]
    pub model: ClassifierKind,
    #[arg(long, default_value = "FOOT_PLUS_PELVIS")]
    pub config: SensorConfig,
    #[arg(long, default_value = "STRIDE")]
    pub interval: Interval,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub ann: AnnArgs,
    /// Path of the saved model (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[arg(long)]
    pub seed: u64,
    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Classifiers, comma separated (default: all six).
    #[arg(long, value_delimiter = ',')]
    pub classifiers: Option<Vec<ClassifierKind>>,
    /// Sensor configurations, comma separated (default: all three).
    #[arg(long, value_delimiter = ',')]
    pub configs: Option<Vec<SensorConfig>>,
    /// Intervals, comma separated (default: all seven).
    #[arg(long, value_delimiter = ',')]
    pub intervals: Option<Vec<Interval>>,
    #[command(flatten)]
    pub ann: AnnArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `report.json` written by `evaluate`, or its directory.
    #[arg(long)]
    pub report: PathBuf,
    /// Cell of the confusion-matrix table as CONFIG,INTERVAL,CLASSIFIER.
    #[arg(long, default_value = "PELVIS,DLS1,ANN")]
    pub confusion: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn provenance(command: &str, config: Value) -> Value {
    json!({ "tool": "gaitid", "version": env!("CARGO_PKG_VERSION"), "command": command, "config": config })
}

fn inputs_json(entries: &[ManifestEntry]) -> Value {
    entries.iter().map(|e| json!({ "subject_id": e.subject_id, "path": e.path })).collect()
}

fn pipeline_json(p: &PipelineConfig) -> Value {
    serde_json::to_value(p).expect("plain data")
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Events(a) => events(&a),
        Command::Segment(a) => segment(&a),
        Command::Features(a) => features(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Report(a) => report(&a),
    }
}

fn synth(a: &SynthArgs) -> Result<()> {
    if !(0.0..=0.2).contains(&a.noise) {
        return Err(CliError::Usage(format!("--noise {} outside 0..0.2", a.noise)));
    }
    if a.strides < 1 {
        return Err(CliError::Usage("--strides must be at least 1".into()));
    }
    let prov = provenance(
        "synth",
        json!({ "subjects": a.subjects, "strides": a.strides, "noise": a.noise, "rate_hz": a.rate, "seed": a.seed }),
    );
    let profiles = generate_profiles(a.subjects, a.seed)?.profiles;
    let mut artifacts = Vec::new();
    let mut entries = Vec::new();
    let mut truths = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        let p = p.clone().with_noise(a.noise);
        let (rec, gt) = synthesize_recording(&p, duration_for_strides(&p, a.strides), a.rate, derive_seed(a.seed, i as u64))?;
        let file = format!("{}.csv", p.subject_id);
        artifacts.push(recording_artifact(&file, &rec, &prov));
        entries.push(ManifestEntry { subject_id: p.subject_id.clone(), path: file });
        truths.push(gt);
    }
    artifacts.push(manifest_artifact(MANIFEST_FILE, &entries, &prov));
    artifacts.push(tables::ground_truth_csv("ground_truth.csv", &truths, &prov));
    let with_noise: Vec<_> = profiles.into_iter().map(|p| p.with_noise(a.noise)).collect();
    artifacts.push(Artifact::json("profiles.json", &json!({ "provenance": prov, "profiles": with_noise })));
    commit(&a.out, &artifacts)
}

fn events(a: &EventsArgs) -> Result<()> {
    let data = a.input.load()?;
    let cfg = a.filter.pipeline();
    let prov = provenance("events", json!({ "pipeline": pipeline_json(&cfg), "inputs": inputs_json(&data.entries) }));
    let mut artifacts = Vec::new();
    for (i, rec) in data.dataset.recordings.iter().enumerate() {
        let an = analyze_recording(rec, &cfg).map_err(|e| CliError::Usage(format!("{}: {e}", data.entries[i].path)))?;
        artifacts.push(tables::events_csv(&format!("{}.events.csv", data.stem(i)), &[&an.left, &an.right], &prov));
    }
    commit(&a.out, &artifacts)
}

fn analyse(input: &InputArgs, cfg: &PipelineConfig) -> Result<(LoadedData, DatasetAnalysis)> {
    let data = input.load()?;
    let analysis = analyze_dataset(&data.dataset, cfg);
    if analysis.recordings.iter().all(Option::is_none) {
        return Err(CliError::Usage(format!("no recording could be analysed: {}", analysis.describe_failures().join("; "))));
    }
    Ok((data, analysis))
}

fn failures_json(an: &DatasetAnalysis) -> Value {
    json!(an.describe_failures())
}

fn segment(a: &SegmentArgs) -> Result<()> {
    let cfg = a.filter.pipeline();
    let (data, an) = analyse(&a.input, &cfg)?;
    let prov = provenance(
        "segment",
        json!({ "pipeline": pipeline_json(&cfg), "inputs": inputs_json(&data.entries), "recording_failures": failures_json(&an) }),
    );
    let strides: Vec<_> = an
        .recordings
        .iter()
        .zip(&data.dataset.recordings)
        .filter_map(|(r, rec)| r.as_ref().map(|r| (rec.subject_id().to_string(), r)))
        .flat_map(|(s, r)| r.strides.iter().map(move |seg| (s.clone(), *seg)))
        .collect();
    commit(&a.out, &[tables::segments_csv("segments.csv", &strides, &prov)])
}

fn features(a: &FeaturesArgs) -> Result<()> {
    let cfg = a.filter.pipeline();
    let (data, an) = analyse(&a.input, &cfg)?;
    let prov = provenance(
        "features",
        json!({
            "pipeline": pipeline_json(&cfg),
            "config": a.config,
            "interval": a.interval,
            "inputs": inputs_json(&data.entries),
            "recording_failures": failures_json(&an),
        }),
    );
    let vectors = an.feature_vectors(a.config, a.interval)?;
    commit(&a.out, &[tables::features_csv("features.csv", a.config, &vectors, &prov)])
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let cfg = a.filter.pipeline();
    let spec = a.ann.apply(a.model.default_spec());
    spec.validate()?;
    let (data, an) = analyse(&a.input, &cfg)?;
    let raw = an.feature_matrix(a.config, a.interval)?;
    let scaler = MinMaxScaler::fit(&raw)?;
    let set = LabeledSet::with_class_count(scaler.transform(&raw)?, an.labels(), an.n_classes())?;
    let model = train(&spec, &set, a.seed)?;
    let prov = provenance(
        "train",
        json!({
            "pipeline": pipeline_json(&cfg),
            "classifier": spec,
            "config": a.config,
            "interval": a.interval,
            "seed": a.seed,
            "samples": set.len(),
            "inputs": inputs_json(&data.entries),
            "recording_failures": failures_json(&an),
        }),
    );
    let saved = SavedModel::new(prov, a.config, a.interval, an.subjects.clone(), scaler, model);
    let name = a.out.file_name().ok_or_else(|| CliError::Usage("--out must name a file".into()))?;
    let dir = a.out.parent().unwrap_or(Path::new(""));
    commit(dir, &[Artifact::json(name, &saved)])
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let cfg = a.filter.pipeline();
    let kinds = a.classifiers.clone().unwrap_or_else(|| ClassifierKind::ALL.to_vec());
    let grid = GridSpec {
        configs: a.configs.clone().unwrap_or_else(|| SensorConfig::ALL.to_vec()),
        intervals: a.intervals.clone().unwrap_or_else(|| Interval::ALL.to_vec()),
        classifiers: kinds.iter().map(|k| a.ann.apply(k.default_spec())).collect(),
        folds: a.folds,
        seed: a.seed,
    };
    for spec in &grid.classifiers {
        spec.validate()?;
    }
    let (data, an) = analyse(&a.input, &cfg)?;
    let report = run_grid(&an, &grid)?;
    let prov = provenance(
        "evaluate",
        json!({ "pipeline": pipeline_json(&cfg), "grid": grid, "inputs": inputs_json(&data.entries) }),
    );
    let mut artifacts = vec![
        Artifact::json(REPORT_FILE, &json!({ "provenance": prov, "report": report })),
        tables::grid_csv(GRID_FILE, &report, &prov),
    ];
    for c in &report.cells {
        let name = format!("confusion/{}_{}_{}.csv", c.config.as_str(), c.interval.as_str(), c.classifier.as_str());
        let confusion = c.result.as_ref().map(|r| &r.confusion);
        artifacts.push(tables::confusion_csv(&name, &report.metadata.subjects, confusion, &prov));
    }
    commit(&a.out, &artifacts)
}

fn parse_cell(s: &str) -> Result<(SensorConfig, Interval, ClassifierKind)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("--confusion {s:?} is not CONFIG,INTERVAL,CLASSIFIER")));
    }
    Ok((parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
}

fn report(a: &ReportArgs) -> Result<()> {
    let path = if a.report.is_dir() { a.report.join(REPORT_FILE) } else { a.report.clone() };
    let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    let doc: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::format(&path, e.to_string()))?;
    let report: gaitid_core::evaluation::EvaluationReport = doc
        .get("report")
        .cloned()
        .ok_or_else(|| CliError::format(&path, "no \"report\" member"))
        .and_then(|r| serde_json::from_value(r).map_err(|e| CliError::format(&path, e.to_string())))?;
    let (config, interval, kind) = parse_cell(&a.confusion)?;
    let prov = provenance(
        "report",
        json!({ "source": doc.get("provenance").cloned().unwrap_or(Value::Null), "confusion_cell": [config, interval, kind] }),
    );
    let confusion = report.cell(config, interval, kind).and_then(|c| c.result.as_ref()).map(|r| &r.confusion);
    let artifacts = [
        tables::phase_comparison_csv("phase_comparison.csv", &report, &prov),
        tables::cumulative_phase_csv("cumulative_phase.csv", &report, &prov),
        tables::sensor_comparison_csv("sensor_comparison.csv", &report, &prov),
        tables::confusion_csv("confusion_matrix.csv", &report.metadata.subjects, confusion, &prov),
    ];
    commit(&a.out, &artifacts)
}
