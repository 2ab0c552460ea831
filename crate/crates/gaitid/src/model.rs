//! Saved models: a versioned JSON document holding the feature selection,
//! the fitted scaler, the subject labels and the trained classifier.

use std::path::Path;

use gaitid_core::classifiers::TrainedModel;
use gaitid_core::features::{MinMaxScaler, SensorConfig};
use gaitid_core::matrix::Matrix;
use gaitid_core::segmentation::Interval;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MODEL_FORMAT: &str = "gaitid-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format: String,
    pub format_version: u32,
    pub provenance: serde_json::Value,
    pub config: SensorConfig,
    pub interval: Interval,
    /// Class index to subject label.
    pub subjects: Vec<String>,
    pub scaler: MinMaxScaler,
    pub model: TrainedModel,
}

impl SavedModel {
    pub fn new(
        provenance: serde_json::Value,
        config: SensorConfig,
        interval: Interval,
        subjects: Vec<String>,
        scaler: MinMaxScaler,
        model: TrainedModel,
    ) -> Self {
        Self { format: MODEL_FORMAT.into(), format_version: MODEL_VERSION, provenance, config, interval, subjects, scaler, model }
    }

    /// Subject label of every row of raw (unscaled) features.
    pub fn predict_subjects(&self, raw: &Matrix) -> Result<Vec<String>> {
        let x = self.scaler.transform(raw)?;
        Ok(self.model.predict(&x)?.into_iter().map(|c| self.subjects[c].clone()).collect())
    }
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let m: SavedModel = serde_json::from_slice(&bytes).map_err(|e| CliError::format(path, e.to_string()))?;
    if m.format != MODEL_FORMAT || m.format_version != MODEL_VERSION {
        return Err(CliError::format(
            path,
            format!("unsupported model format {} version {}", m.format, m.format_version),
        ));
    }
    if m.model.dim() != m.config.dimension() || m.scaler.dim() != m.config.dimension() {
        return Err(CliError::format(path, "model width does not match its sensor configuration"));
    }
    Ok(m)
}
