//! Recording-to-feature plumbing shared by the evaluation grid and the CLI.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::events::{detect_events, pair_bilateral, BilateralEvents, EventDetectorConfig, GaitEventTrack};
use crate::features::{find_contralateral, stride_features, FeatureVector, SensorConfig};
use crate::gait_data::{Dataset, Recording, SensorId};
use crate::matrix::Matrix;
use crate::preprocess::{preprocess_recording, FilterSpec, PreprocessedRecording};
use crate::segmentation::{extract_phase_window, segment_strides, Interval, StrideSegmentation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub filter_order: usize,
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub events: EventDetectorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { filter_order: 3, low_cut_hz: 0.5, high_cut_hz: 15.0, events: EventDetectorConfig::default() }
    }
}

impl PipelineConfig {
    pub fn filter_spec(&self, sample_rate_hz: f64) -> FilterSpec {
        FilterSpec { order: self.filter_order, low_cut_hz: self.low_cut_hz, high_cut_hz: self.high_cut_hz, sample_rate_hz }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordingAnalysis {
    pub pre: PreprocessedRecording,
    pub left: GaitEventTrack,
    pub right: GaitEventTrack,
    pub bilateral: BilateralEvents,
    /// Right-referenced strides, then left-referenced.
    pub strides: Vec<StrideSegmentation>,
    pub dropped_by_gate: usize,
}

/// Filter, detect events on both feet, pair them and segment strides with
/// each foot as reference in turn.
pub fn analyze_recording(rec: &Recording, cfg: &PipelineConfig) -> Result<RecordingAnalysis> {
    let pre = preprocess_recording(rec, &cfg.filter_spec(rec.sample_rate_hz()))?;
    let track = |foot: SensorId| {
        let s = pre.sensor(foot);
        detect_events(&s.axes[4], &s.t, foot, &cfg.events)
    };
    let left = track(SensorId::LeftFoot)?;
    let right = track(SensorId::RightFoot)?;
    let bilateral = pair_bilateral(&left, &right);
    let mut strides = Vec::new();
    let mut dropped_by_gate = 0;
    for foot in [SensorId::RightFoot, SensorId::LeftFoot] {
        let seg = segment_strides(&bilateral, foot);
        strides.extend(seg.strides);
        dropped_by_gate += seg.dropped;
    }
    Ok(RecordingAnalysis { pre, left, right, bilateral, strides, dropped_by_gate })
}

/// A stride usable for features: it has a contralateral partner and every
/// sensor covers it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrideSample {
    pub recording: usize,
    pub stride: usize,
    pub contra: usize,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingFailure {
    pub recording: usize,
    pub subject_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DropCounts {
    pub excluded_by_pairing: usize,
    pub dropped_by_stance_gate: usize,
    pub no_contralateral_stride: usize,
    pub outside_recording: usize,
    pub failed_recordings: usize,
}

#[derive(Debug, Clone)]
pub struct DatasetAnalysis {
    /// Class index to subject label.
    pub subjects: Vec<String>,
    pub recordings: Vec<Option<RecordingAnalysis>>,
    pub failures: Vec<RecordingFailure>,
    pub samples: Vec<StrideSample>,
    pub drops: DropCounts,
}

pub fn analyze_dataset(d: &Dataset, cfg: &PipelineConfig) -> DatasetAnalysis {
    let subjects = d.subjects();
    let mut recordings = Vec::with_capacity(d.recordings.len());
    let mut failures = Vec::new();
    let mut samples = Vec::new();
    let mut drops = DropCounts::default();
    for (ri, rec) in d.recordings.iter().enumerate() {
        let analysis = match analyze_recording(rec, cfg) {
            Ok(a) => a,
            Err(e) => {
                failures.push(RecordingFailure { recording: ri, subject_id: rec.subject_id().to_string(), error: e.to_string() });
                recordings.push(None);
                continue;
            }
        };
        let label = subjects.iter().position(|s| s == rec.subject_id()).expect("subject listed");
        drops.excluded_by_pairing += analysis.bilateral.excluded.len();
        drops.dropped_by_stance_gate += analysis.dropped_by_gate;
        for (si, seg) in analysis.strides.iter().enumerate() {
            let Some(contra) = find_contralateral(seg, &analysis.strides) else {
                drops.no_contralateral_stride += 1;
                continue;
            };
            let contra = analysis.strides.iter().position(|s| s == contra).expect("found above");
            let covered = SensorId::ALL
                .iter()
                .all(|&s| extract_phase_window(&analysis.pre, seg, Interval::Stride, s).is_ok());
            if !covered {
                drops.outside_recording += 1;
                continue;
            }
            samples.push(StrideSample { recording: ri, stride: si, contra, label });
        }
        recordings.push(Some(analysis));
    }
    drops.failed_recordings = failures.len();
    DatasetAnalysis { subjects, recordings, failures, samples, drops }
}

impl DatasetAnalysis {
    pub fn n_classes(&self) -> usize {
        self.subjects.len()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    fn recording(&self, i: usize) -> &RecordingAnalysis {
        self.recordings[i].as_ref().expect("samples only reference analysed recordings")
    }

    /// Feature matrix with one row per entry of `samples`.
    pub fn feature_matrix(&self, config: SensorConfig, interval: Interval) -> Result<Matrix> {
        let mut data = Vec::with_capacity(self.samples.len() * config.dimension());
        for s in &self.samples {
            let r = self.recording(s.recording);
            data.extend(stride_features(&r.pre, &r.strides[s.stride], &r.strides[s.contra], interval, config)?);
        }
        Matrix::from_vec(self.samples.len(), config.dimension(), data)
    }

    pub fn feature_vectors(&self, config: SensorConfig, interval: Interval) -> Result<Vec<FeatureVector>> {
        self.samples
            .iter()
            .map(|s| {
                let r = self.recording(s.recording);
                let seg = &r.strides[s.stride];
                Ok(FeatureVector {
                    subject_id: self.subjects[s.label].clone(),
                    reference_foot: seg.reference_foot,
                    stride_index: seg.stride_index,
                    interval,
                    config,
                    values: stride_features(&r.pre, seg, &r.strides[s.contra], interval, config)?,
                })
            })
            .collect()
    }

    /// Per-subject sample counts, in class order.
    pub fn samples_per_subject(&self) -> Vec<usize> {
        let mut c = alloc::vec![0; self.n_classes()];
        for s in &self.samples {
            c[s.label] += 1;
        }
        c
    }

    pub fn describe_failures(&self) -> Vec<String> {
        self.failures.iter().map(|f| format!("recording {} ({}): {}", f.recording, f.subject_id, f.error)).collect()
    }
}
