//! CSV renderings of pipeline outputs and evaluation reports.

use gaitid_core::classifiers::ClassifierKind;
use gaitid_core::evaluation::{Confusion, EvaluationReport, GridCell};
use gaitid_core::events::GaitEventTrack;
use gaitid_core::features::{FeatureVector, SensorConfig};
use gaitid_core::segmentation::{Interval, StrideSegmentation};
use gaitid_core::synth::GroundTruth;
use serde_json::Value;

use crate::artifact::{accuracy_cell, Artifact};

pub const EVENTS_HEADER: [&str; 3] = ["foot", "event_type", "time_s"];
pub const SEGMENTS_HEADER: [&str; 7] = ["subject", "stride", "ref_foot", "dls1_s", "sls_s", "dls2_s", "swing_s"];
pub const GROUND_TRUTH_HEADER: [&str; 4] = ["subject", "foot", "event", "time_s"];

pub fn events_csv(path: &str, tracks: &[&GaitEventTrack], provenance: &Value) -> Artifact {
    let mut events: Vec<_> = tracks.iter().flat_map(|t| t.merged()).collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.foot.cmp(&b.foot)));
    let rows = events
        .iter()
        .map(|e| vec![e.foot.as_str().to_string(), e.kind.as_str().to_string(), e.time.to_string()])
        .collect();
    Artifact::csv(path, provenance, &EVENTS_HEADER, rows)
}

pub fn segments_csv(path: &str, strides: &[(String, StrideSegmentation)], provenance: &Value) -> Artifact {
    let rows = strides
        .iter()
        .map(|(subject, s)| {
            let mut row = vec![subject.clone(), s.stride_index.to_string(), s.reference_foot.as_str().to_string()];
            row.extend(s.phase_durations().iter().map(f64::to_string));
            row
        })
        .collect();
    Artifact::csv(path, provenance, &SEGMENTS_HEADER, rows)
}

/// Header `subject,stride,ref_foot,interval,config,f0..fN`.
pub fn features_csv(path: &str, config: SensorConfig, vectors: &[FeatureVector], provenance: &Value) -> Artifact {
    let mut header: Vec<String> = ["subject", "stride", "ref_foot", "interval", "config"].map(String::from).to_vec();
    header.extend((0..config.dimension()).map(|i| format!("f{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = vectors
        .iter()
        .map(|v| {
            let mut row = vec![
                v.subject_id.clone(),
                v.stride_index.to_string(),
                v.reference_foot.as_str().to_string(),
                v.interval.as_str().to_string(),
                v.config.as_str().to_string(),
            ];
            row.extend(v.values.iter().map(f64::to_string));
            row
        })
        .collect();
    Artifact::csv(path, provenance, &header, rows)
}

pub fn ground_truth_csv(path: &str, truths: &[GroundTruth], provenance: &Value) -> Artifact {
    let mut rows = Vec::new();
    for gt in truths {
        let mut events: Vec<_> = gt.left.merged().into_iter().chain(gt.right.merged()).collect();
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.foot.cmp(&b.foot)));
        for e in events {
            rows.push(vec![gt.subject_id.clone(), e.foot.as_str().to_string(), e.kind.as_str().to_string(), e.time.to_string()]);
        }
    }
    Artifact::csv(path, provenance, &GROUND_TRUTH_HEADER, rows)
}

fn classifiers_of(report: &EvaluationReport) -> Vec<ClassifierKind> {
    ClassifierKind::ALL.into_iter().filter(|k| report.cells.iter().any(|c| c.classifier == *k)).collect()
}

fn accuracy(report: &EvaluationReport, config: SensorConfig, interval: Interval, k: ClassifierKind) -> Option<f64> {
    report.cell(config, interval, k).and_then(GridCell::mean_accuracy)
}

/// Accuracy table: one row per (config, interval), one column per
/// classifier, then the row's best classifiers joined by `|`.
pub fn grid_csv(path: &str, report: &EvaluationReport, provenance: &Value) -> Artifact {
    let kinds = classifiers_of(report);
    let mut header = vec!["config", "interval"];
    header.extend(kinds.iter().map(|k| k.as_str()));
    header.push("best");
    let mut rows = Vec::new();
    for config in SensorConfig::ALL {
        for interval in Interval::ALL {
            let cells: Vec<&GridCell> =
                kinds.iter().filter_map(|&k| report.cell(config, interval, k)).collect();
            if cells.is_empty() {
                continue;
            }
            let mut row = vec![config.as_str().to_string(), interval.as_str().to_string()];
            row.extend(kinds.iter().map(|&k| accuracy_cell(accuracy(report, config, interval, k))));
            let best: Vec<&str> = cells.iter().filter(|c| c.best_in_row).map(|c| c.classifier.as_str()).collect();
            row.push(best.join("|"));
            rows.push(row);
        }
    }
    Artifact::csv(path, provenance, &header, rows)
}

/// Row-normalised confusion matrix: `true_subject`, one column per predicted
/// subject, then `support`. With no confusion every rate is empty.
pub fn confusion_csv(path: &str, subjects: &[String], confusion: Option<&Confusion>, provenance: &Value) -> Artifact {
    let mut header = vec!["true_subject".to_string()];
    header.extend(subjects.iter().cloned());
    header.push("support".to_string());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = subjects
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![s.clone()];
            match confusion {
                Some(c) => {
                    row.extend(c.normalized[i].iter().map(f64::to_string));
                    row.push(c.counts[i].iter().sum::<u64>().to_string());
                }
                None => row.extend(std::iter::repeat_n(String::new(), subjects.len() + 1)),
            }
            row
        })
        .collect();
    Artifact::csv(path, provenance, &header, rows)
}

/// Single phases side by side, per config and classifier.
pub fn phase_comparison_csv(path: &str, report: &EvaluationReport, provenance: &Value) -> Artifact {
    by_interval(path, report, &Interval::PHASES, provenance)
}

/// Growing fractions of the gait cycle: DLS1, STEP, STANCE, STRIDE.
pub fn cumulative_phase_csv(path: &str, report: &EvaluationReport, provenance: &Value) -> Artifact {
    by_interval(path, report, &[Interval::Dls1, Interval::Step, Interval::Stance, Interval::Stride], provenance)
}

fn by_interval(path: &str, report: &EvaluationReport, intervals: &[Interval], provenance: &Value) -> Artifact {
    let mut header = vec!["config", "classifier"];
    header.extend(intervals.iter().map(|i| i.as_str()));
    let mut rows = Vec::new();
    for config in SensorConfig::ALL {
        for k in classifiers_of(report) {
            let mut row = vec![config.as_str().to_string(), k.as_str().to_string()];
            row.extend(intervals.iter().map(|&i| accuracy_cell(accuracy(report, config, i, k))));
            rows.push(row);
        }
    }
    Artifact::csv(path, provenance, &header, rows)
}

/// The three sensor configurations side by side, per interval and
/// classifier.
pub fn sensor_comparison_csv(path: &str, report: &EvaluationReport, provenance: &Value) -> Artifact {
    let mut header = vec!["interval", "classifier"];
    header.extend(SensorConfig::ALL.iter().map(|c| c.as_str()));
    let mut rows = Vec::new();
    for interval in Interval::ALL {
        for k in classifiers_of(report) {
            let mut row = vec![interval.as_str().to_string(), k.as_str().to_string()];
            row.extend(SensorConfig::ALL.iter().map(|&c| accuracy_cell(accuracy(report, c, interval, k))));
            rows.push(row);
        }
    }
    Artifact::csv(path, provenance, &header, rows)
}
