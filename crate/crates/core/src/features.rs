//! Per-stride feature vectors: eight phase durations, then MIN, MAX, AVG
//! and STD of every selected signal over the chosen interval.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gait_data::SensorId;
use crate::matrix::Matrix;
use crate::preprocess::PreprocessedRecording;
use crate::segmentation::{extract_phase_window, Interval, StrideSegmentation};

pub const TEMPORAL_DIM: usize = 8;
pub const STATS_PER_SIGNAL: usize = 4;

/// Which sensors feed the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SensorConfig {
    /// The reference foot's sensor only.
    #[serde(rename = "FOOT")]
    Foot,
    #[serde(rename = "PELVIS")]
    Pelvis,
    #[serde(rename = "FOOT_PLUS_PELVIS")]
    FootPlusPelvis,
}

impl SensorConfig {
    pub const ALL: [SensorConfig; 3] = [SensorConfig::Foot, SensorConfig::Pelvis, SensorConfig::FootPlusPelvis];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorConfig::Foot => "FOOT",
            SensorConfig::Pelvis => "PELVIS",
            SensorConfig::FootPlusPelvis => "FOOT_PLUS_PELVIS",
        }
    }

    pub fn signal_count(self) -> usize {
        match self {
            SensorConfig::Foot => 4,
            SensorConfig::Pelvis => 6,
            SensorConfig::FootPlusPelvis => 10,
        }
    }

    pub fn dimension(self) -> usize {
        TEMPORAL_DIM + STATS_PER_SIGNAL * self.signal_count()
    }

    /// Sensors in feature order, pelvis first.
    fn sensors(self, reference_foot: SensorId) -> Vec<SensorId> {
        match self {
            SensorConfig::Foot => alloc::vec![reference_foot],
            SensorConfig::Pelvis => alloc::vec![SensorId::Pelvis],
            SensorConfig::FootPlusPelvis => alloc::vec![SensorId::Pelvis, reference_foot],
        }
    }
}

impl fmt::Display for SensorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_uppercase().replace(' ', "");
        match norm.as_str() {
            "FOOT" => Ok(SensorConfig::Foot),
            "PELVIS" => Ok(SensorConfig::Pelvis),
            "FOOT_PLUS_PELVIS" | "FOOT+PELVIS" | "FOOT_PELVIS" => Ok(SensorConfig::FootPlusPelvis),
            _ => Err(Error::Validation(alloc::format!("unknown sensor config {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

pub fn descriptive_stats(window: &[f64]) -> Result<Stats> {
    if window.is_empty() {
        return Err(Error::validation("empty window"));
    }
    let n = window.len() as f64;
    let (min, max) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = (window.iter().sum::<f64>() / n).clamp(min, max);
    let var = window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(Stats { min, max, mean, std: libm::sqrt(var) })
}

/// `[DLS1, SLS, DLS2, SWING]` of the reference stride followed by the same
/// four for the contralateral stride.
pub fn temporal_params(seg_ref: &StrideSegmentation, seg_contra: &StrideSegmentation) -> [f64; TEMPORAL_DIM] {
    let mut out = [0.0; TEMPORAL_DIM];
    out[..4].copy_from_slice(&seg_ref.phase_durations());
    out[4..].copy_from_slice(&seg_contra.phase_durations());
    out
}

/// The contralateral stride that starts at the reference stride's
/// contralateral heel strike.
pub fn find_contralateral<'a>(
    seg_ref: &StrideSegmentation,
    contra: &'a [StrideSegmentation],
) -> Option<&'a StrideSegmentation> {
    let start = seg_ref.boundaries[2];
    contra
        .iter()
        .find(|c| c.reference_foot == seg_ref.reference_foot.contralateral() && c.boundaries[0] == start)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject_id: String,
    pub reference_foot: SensorId,
    pub stride_index: usize,
    pub interval: Interval,
    pub config: SensorConfig,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn temporal(&self) -> &[f64] {
        &self.values[..TEMPORAL_DIM]
    }

    pub fn stats(&self) -> &[f64] {
        &self.values[TEMPORAL_DIM..]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureBuild {
    pub vectors: Vec<FeatureVector>,
    /// Reference strides with no contralateral stride to pair with.
    pub skipped_no_contra: usize,
}

/// One vector per reference stride that has a contralateral partner.
/// `segs` holds the strides of both feet.
pub fn build_features(
    pr: &PreprocessedRecording,
    segs: &[StrideSegmentation],
    interval: Interval,
    config: SensorConfig,
) -> Result<FeatureBuild> {
    let mut out = FeatureBuild::default();
    for seg in segs {
        let Some(contra) = find_contralateral(seg, segs) else {
            out.skipped_no_contra += 1;
            continue;
        };
        let values = stride_features(pr, seg, contra, interval, config)?;
        out.vectors.push(FeatureVector {
            subject_id: pr.subject_id.clone(),
            reference_foot: seg.reference_foot,
            stride_index: seg.stride_index,
            interval,
            config,
            values,
        });
    }
    Ok(out)
}

pub(crate) fn stride_features(
    pr: &PreprocessedRecording,
    seg: &StrideSegmentation,
    contra: &StrideSegmentation,
    interval: Interval,
    config: SensorConfig,
) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(config.dimension());
    values.extend_from_slice(&temporal_params(seg, contra));
    for sensor in config.sensors(seg.reference_foot) {
        let window = extract_phase_window(pr, seg, interval, sensor)?;
        for (_, samples) in &window.channels {
            let s = descriptive_stats(samples)?;
            values.extend_from_slice(&[s.min, s.max, s.mean, s.std]);
        }
    }
    debug_assert_eq!(values.len(), config.dimension());
    Ok(values)
}

/// Per-feature MinMax scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(train: &Matrix) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::validation("cannot fit a scaler on an empty matrix"));
        }
        let mut min = alloc::vec![f64::INFINITY; train.cols()];
        let mut max = alloc::vec![f64::NEG_INFINITY; train.cols()];
        for row in train.iter_rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Constant training features map to 0. No clipping.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.cols() });
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range > 0.0 { (*v - self.min[j]) / range } else { 0.0 };
            }
        }
        Ok(out)
    }
}

/// Fits on `train` only and applies to `train` and every matrix in `others`.
pub fn minmax_scale_features(train: &Matrix, others: &[&Matrix]) -> Result<(Matrix, Vec<Matrix>, MinMaxScaler)> {
    let scaler = MinMaxScaler::fit(train)?;
    let t = scaler.transform(train)?;
    let o = others.iter().map(|m| scaler.transform(m)).collect::<Result<Vec<_>>>()?;
    Ok((t, o, scaler))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_examples() {
        let s = descriptive_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean), (1.0, 4.0, 2.5));
        assert!((s.std - libm::sqrt(1.25)).abs() < 1e-12);
        let s = descriptive_stats(&[0.1; 7]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.std), (0.1, 0.1, 0.1, 0.0));
        let s = descriptive_stats(&[-1.0, 1.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.std), (-1.0, 1.0, 0.0, 1.0));
        assert!(descriptive_stats(&[]).is_err());
    }

    #[test]
    fn dimensions_per_config() {
        assert_eq!(SensorConfig::Pelvis.dimension(), 32);
        assert_eq!(SensorConfig::Foot.dimension(), 24);
        assert_eq!(SensorConfig::FootPlusPelvis.dimension(), 48);
    }

    #[test]
    fn temporal_params_of_symmetric_example() {
        let r = StrideSegmentation {
            reference_foot: SensorId::RightFoot,
            stride_index: 0,
            boundaries: [0.0, 0.10, 0.50, 0.60, 1.00],
        };
        let l = StrideSegmentation {
            reference_foot: SensorId::LeftFoot,
            stride_index: 0,
            boundaries: [0.50, 0.60, 1.00, 1.10, 1.50],
        };
        assert_eq!(find_contralateral(&r, &[l]), Some(&l));
        let p = temporal_params(&r, &l);
        let want = [0.10, 0.40, 0.10, 0.40, 0.10, 0.40, 0.10, 0.40];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        // the left stride has no right stride starting at 1.0
        assert_eq!(find_contralateral(&l, &[r]), None);
    }

    #[test]
    fn scaler_examples() {
        let train = Matrix::from_rows(&[[0.0], [10.0]]).unwrap();
        let test = Matrix::from_rows(&[[5.0], [20.0]]).unwrap();
        let (_, o, _) = minmax_scale_features(&train, &[&test]).unwrap();
        assert_eq!(o[0].as_slice(), &[0.5, 2.0]);
        let train = Matrix::from_rows(&[[2.0], [2.0]]).unwrap();
        let (t, _, _) = minmax_scale_features(&train, &[]).unwrap();
        assert_eq!(t.as_slice(), &[0.0, 0.0]);
        let wide = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(minmax_scale_features(&train, &[&wide]).is_err());
    }

    #[test]
    fn config_names_parse() {
        assert_eq!("FOOT+PELVIS".parse::<SensorConfig>().unwrap(), SensorConfig::FootPlusPelvis);
        assert_eq!("foot_plus_pelvis".parse::<SensorConfig>().unwrap(), SensorConfig::FootPlusPelvis);
        assert_eq!("pelvis".parse::<SensorConfig>().unwrap(), SensorConfig::Pelvis);
        assert!("hand".parse::<SensorConfig>().is_err());
    }
}
