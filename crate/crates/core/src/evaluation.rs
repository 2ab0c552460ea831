//! Stratified k-fold cross-validation over the config × interval ×
//! classifier grid.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierKind, ClassifierSpec, LabeledSet, TrainedModel};
use crate::error::{Error, Result};
use crate::features::{MinMaxScaler, SensorConfig};
use crate::matrix::Matrix;
use crate::pipeline::{DatasetAnalysis, DropCounts};
use crate::rng::{derive_seed, seeded};
use crate::segmentation::Interval;

pub const SCALER_POLICY: &str = "minmax fitted on the training folds only, constant features map to 0, no clipping";
pub const SVM_MULTICLASS: &str = "one-vs-rest";
pub const STRIDE_POOLING: &str = "strides of both reference feet pooled per subject";

/// Fold index of every sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub warnings: Vec<String>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignments {
            s[f] += 1;
        }
        s
    }
}

/// Each class's samples are shuffled and dealt round-robin, the dealing
/// position carrying over from one class to the next so fold sizes differ by
/// at most one.
pub fn make_folds(labels: &[usize], n_classes: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::validation("need at least 2 folds"));
    }
    if labels.len() < k {
        return Err(Error::Validation(format!("{} samples cannot fill {k} folds", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::Validation(format!("label {bad} outside 0..{n_classes}")));
    }
    let mut rng = seeded(seed);
    let mut assignments = vec![0; labels.len()];
    let mut warnings = Vec::new();
    let mut next = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            warnings.push(format!("class {class} has {} samples, fewer than {k} folds", members.len()));
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignments, warnings })
}

/// Scaler and model of one fold. Depends only on the training rows.
pub fn train_fold(
    x: &Matrix,
    labels: &[usize],
    n_classes: usize,
    spec: &ClassifierSpec,
    plan: &FoldPlan,
    fold: usize,
    seed: u64,
) -> Result<(MinMaxScaler, TrainedModel)> {
    let train_idx = plan.train_indices(fold);
    let raw = x.select_rows(&train_idx);
    let scaler = MinMaxScaler::fit(&raw)?;
    let y = train_idx.iter().map(|&i| labels[i]).collect();
    let set = LabeledSet::with_class_count(scaler.transform(&raw)?, y, n_classes)?;
    let model = train(spec, &set, derive_seed(seed, fold as u64))?;
    Ok((scaler, model))
}

/// Confusion counts (rows true, columns predicted) with row-normalised rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: Vec<Vec<u64>>,
    pub normalized: Vec<Vec<f64>>,
    /// Classes with no test samples. Their normalised rows are zero.
    pub zero_support: Vec<bool>,
}

impl Confusion {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let mut normalized = Vec::with_capacity(counts.len());
        let mut zero_support = Vec::with_capacity(counts.len());
        for row in &counts {
            let total: u64 = row.iter().sum();
            zero_support.push(total == 0);
            normalized.push(row.iter().map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 }).collect());
        }
        Self { counts, normalized, zero_support }
    }

    pub fn accuracy(&self) -> f64 {
        let total: u64 = self.counts.iter().flatten().sum();
        let hit: u64 = (0..self.counts.len()).map(|i| self.counts[i][i]).sum();
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Summed over folds.
    pub confusion: Confusion,
}

pub fn cross_validate(
    x: &Matrix,
    labels: &[usize],
    n_classes: usize,
    spec: &ClassifierSpec,
    plan: &FoldPlan,
    seed: u64,
) -> Result<CvResult> {
    if x.rows() != labels.len() || plan.assignments.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: labels.len().min(plan.assignments.len()) });
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    let mut fold_accuracies = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let test_idx = plan.test_indices(fold);
        if test_idx.is_empty() {
            return Err(Error::Validation(format!("fold {fold} is empty")));
        }
        let (scaler, model) = train_fold(x, labels, n_classes, spec, plan, fold, seed)?;
        let pred = model.predict(&scaler.transform(&x.select_rows(&test_idx))?)?;
        let mut hit = 0;
        for (&i, &p) in test_idx.iter().zip(&pred) {
            counts[labels[i]][p] += 1;
            hit += usize::from(labels[i] == p);
        }
        fold_accuracies.push(hit as f64 / test_idx.len() as f64);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(CvResult { fold_accuracies, mean_accuracy, confusion: Confusion::from_counts(counts) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub config: SensorConfig,
    pub interval: Interval,
    pub classifier: ClassifierKind,
    /// `None` when the cell could not be evaluated; see `absent_reason`.
    pub result: Option<CvResult>,
    pub absent_reason: Option<String>,
    /// Highest mean accuracy of its (config, interval) row, compared at
    /// three decimals.
    pub best_in_row: bool,
}

impl GridCell {
    pub fn mean_accuracy(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.mean_accuracy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub folds: usize,
    pub fold_assignments: Vec<usize>,
    pub fold_warnings: Vec<String>,
    pub scaler_policy: String,
    pub svm_multiclass: String,
    pub stride_pooling: String,
    /// Class index to subject label.
    pub subjects: Vec<String>,
    pub samples_per_subject: Vec<usize>,
    pub n_samples: usize,
    pub drops: DropCounts,
    pub recording_failures: Vec<String>,
    pub classifiers: Vec<ClassifierSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metadata: ReportMetadata,
    pub cells: Vec<GridCell>,
}

impl EvaluationReport {
    pub fn cell(&self, config: SensorConfig, interval: Interval, classifier: ClassifierKind) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.config == config && c.interval == interval && c.classifier == classifier)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub configs: Vec<SensorConfig>,
    pub intervals: Vec<Interval>,
    pub classifiers: Vec<ClassifierSpec>,
    pub folds: usize,
    pub seed: u64,
}

impl GridSpec {
    /// Every config, interval and classifier with default hyperparameters.
    pub fn full(folds: usize, seed: u64) -> Self {
        Self {
            configs: SensorConfig::ALL.to_vec(),
            intervals: Interval::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.iter().map(|k| k.default_spec()).collect(),
            folds,
            seed,
        }
    }
}

/// Runs every cell of the grid on one shared fold plan. Cells that cannot be
/// trained are reported absent with the reason.
pub fn run_grid(data: &DatasetAnalysis, grid: &GridSpec) -> Result<EvaluationReport> {
    for spec in &grid.classifiers {
        spec.validate()?;
    }
    let labels = data.labels();
    let n_classes = data.n_classes();
    let plan = make_folds(&labels, n_classes, grid.folds, derive_seed(grid.seed, 0xF01D))?;
    let mut cells = Vec::new();
    for (ci, &config) in grid.configs.iter().enumerate() {
        for (ii, &interval) in grid.intervals.iter().enumerate() {
            let x = data.feature_matrix(config, interval);
            let row_start = cells.len();
            for (ki, spec) in grid.classifiers.iter().enumerate() {
                let cell_seed = derive_seed(grid.seed, ((ci as u64) << 32) | ((ii as u64) << 16) | ki as u64);
                let outcome = x.as_ref().map_err(Clone::clone).and_then(|x| cross_validate(x, &labels, n_classes, spec, &plan, cell_seed));
                let (result, absent_reason) = match outcome {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                cells.push(GridCell { config, interval, classifier: spec.kind(), result, absent_reason, best_in_row: false });
            }
            mark_best(&mut cells[row_start..]);
        }
    }
    let metadata = ReportMetadata {
        seed: grid.seed,
        folds: grid.folds,
        fold_assignments: plan.assignments,
        fold_warnings: plan.warnings,
        scaler_policy: SCALER_POLICY.to_string(),
        svm_multiclass: SVM_MULTICLASS.to_string(),
        stride_pooling: STRIDE_POOLING.to_string(),
        subjects: data.subjects.clone(),
        samples_per_subject: data.samples_per_subject(),
        n_samples: labels.len(),
        drops: data.drops.clone(),
        recording_failures: data.describe_failures(),
        classifiers: grid.classifiers.clone(),
    };
    Ok(EvaluationReport { metadata, cells })
}

fn round3(v: f64) -> i64 {
    libm::round(v * 1000.0) as i64
}

fn mark_best(row: &mut [GridCell]) {
    let Some(best) = row.iter().filter_map(|c| c.mean_accuracy()).map(round3).max() else {
        return;
    };
    for c in row {
        c.best_in_row = c.mean_accuracy().is_some_and(|a| round3(a) == best);
    }
}
