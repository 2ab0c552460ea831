//! Recordings, sensors and structural validation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of any sampling interval from `1 / sample_rate_hz`.
pub const JITTER_TOLERANCE: f64 = 0.01;
/// Minimum time window all three streams must share, seconds.
pub const MIN_COMMON_WINDOW_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    /// Seconds.
    pub t: f64,
    /// m/s², X Y Z.
    pub acc: [f64; 3],
    /// rad/s, X Y Z.
    pub gyro: [f64; 3],
}

impl ImuSample {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.acc.iter().all(|v| v.is_finite())
            && self.gyro.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorId {
    Pelvis,
    LeftFoot,
    RightFoot,
}

impl SensorId {
    pub const ALL: [SensorId; 3] = [SensorId::Pelvis, SensorId::LeftFoot, SensorId::RightFoot];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SensorId::Pelvis => "pelvis",
            SensorId::LeftFoot => "left_foot",
            SensorId::RightFoot => "right_foot",
        }
    }

    pub fn is_foot(self) -> bool {
        !matches!(self, SensorId::Pelvis)
    }

    /// The other foot. Panics for the pelvis.
    pub fn contralateral(self) -> SensorId {
        match self {
            SensorId::LeftFoot => SensorId::RightFoot,
            SensorId::RightFoot => SensorId::LeftFoot,
            SensorId::Pelvis => panic!("pelvis has no contralateral side"),
        }
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pelvis" => Ok(SensorId::Pelvis),
            "left_foot" => Ok(SensorId::LeftFoot),
            "right_foot" => Ok(SensorId::RightFoot),
            other => Err(Error::validation(format!("unknown sensor id {other:?}"))),
        }
    }
}

/// What is wrong with a single stream, and at which sample.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamFault {
    Empty,
    NonFinite { index: usize },
    NonMonotone { index: usize },
    Jitter { index: usize, dt: f64 },
}

impl fmt::Display for StreamFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamFault::Empty => write!(f, "sensor stream absent"),
            StreamFault::NonFinite { index } => write!(f, "non-finite value at sample {index}"),
            StreamFault::NonMonotone { index } => {
                write!(f, "timestamps not strictly increasing at sample {index}")
            }
            StreamFault::Jitter { index, dt } => {
                write!(f, "sample-rate jitter above 1% at sample {index} (dt = {dt} s)")
            }
        }
    }
}

/// Checks one stream against the per-stream invariants. The reported index
/// is the first offending sample.
pub fn check_stream(samples: &[ImuSample], sample_rate_hz: f64) -> core::result::Result<(), StreamFault> {
    if samples.is_empty() {
        return Err(StreamFault::Empty);
    }
    let nominal = 1.0 / sample_rate_hz;
    for (i, s) in samples.iter().enumerate() {
        if !s.is_finite() {
            return Err(StreamFault::NonFinite { index: i });
        }
        if i > 0 {
            let dt = s.t - samples[i - 1].t;
            if dt <= 0.0 {
                return Err(StreamFault::NonMonotone { index: i });
            }
            if (dt - nominal).abs() > JITTER_TOLERANCE * nominal {
                return Err(StreamFault::Jitter { index: i, dt });
            }
        }
    }
    Ok(())
}

/// Nominal rate from the median sampling interval, rounded to 1 µHz so that
/// timestamps printed in decimal give back round rates. `None` for fewer
/// than two samples or a non-positive median.
pub fn infer_sample_rate(samples: &[ImuSample]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let mut dts: Vec<f64> = samples.windows(2).map(|w| w[1].t - w[0].t).collect();
    dts.sort_by(f64::total_cmp);
    let median = dts[dts.len() / 2];
    (median > 0.0 && median.is_finite()).then(|| libm::round(1e6 / median) / 1e6)
}

/// One subject's session: three uniformly sampled IMU streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    subject_id: String,
    sample_rate_hz: f64,
    streams: [Vec<ImuSample>; 3],
}

impl Recording {
    /// Builds a recording and checks every invariant. `streams` is indexed by
    /// [`SensorId::index`].
    pub fn new(subject_id: impl Into<String>, sample_rate_hz: f64, streams: [Vec<ImuSample>; 3]) -> Result<Self> {
        let rec = Self::new_unchecked(subject_id, sample_rate_hz, streams);
        match rec.violations().into_iter().next() {
            Some(v) => Err(Error::Validation(v)),
            None => Ok(rec),
        }
    }

    /// Builds a recording without checking it. [`validate_dataset`] reports
    /// whatever is wrong with it.
    pub fn new_unchecked(subject_id: impl Into<String>, sample_rate_hz: f64, streams: [Vec<ImuSample>; 3]) -> Self {
        Self { subject_id: subject_id.into(), sample_rate_hz, streams }
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn stream(&self, sensor: SensorId) -> &[ImuSample] {
        &self.streams[sensor.index()]
    }

    /// `[max(start), min(end)]` over the three streams, or `None` if a stream
    /// is empty.
    pub fn common_window(&self) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for s in &self.streams {
            lo = lo.max(s.first()?.t);
            hi = hi.min(s.last()?.t);
        }
        Some((lo, hi))
    }

    /// Every invariant violation, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            out.push(format!("sample rate {} is not a positive number", self.sample_rate_hz));
            return out;
        }
        for sensor in SensorId::ALL {
            if let Err(fault) = check_stream(self.stream(sensor), self.sample_rate_hz) {
                out.push(format!("{sensor}: {fault}"));
            }
        }
        if let Some((lo, hi)) = self.common_window() {
            if hi - lo < MIN_COMMON_WINDOW_S {
                out.push(format!("common window {:.3} s below 2 s", (hi - lo).max(0.0)));
            }
        }
        out
    }
}

/// Recordings from one or more subjects. Several recordings may share a
/// subject; their strides are pooled.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub recordings: Vec<Recording>,
}

impl Dataset {
    pub fn new(recordings: Vec<Recording>) -> Self {
        Self { recordings }
    }

    /// Distinct subject labels in sorted order. A subject's position in this
    /// list is its class index.
    pub fn subjects(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.recordings.iter().map(|r| r.subject_id()).collect();
        set.into_iter().map(ToString::to_string).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingReport {
    pub subject_id: String,
    pub violations: Vec<String>,
}

impl RecordingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub dataset: Vec<String>,
    pub recordings: Vec<RecordingReport>,
}

impl ValidationReport {
    /// All violations, dataset-level first.
    pub fn all_violations(&self) -> Vec<String> {
        let mut out = self.dataset.clone();
        for r in &self.recordings {
            out.extend(r.violations.iter().map(|v| format!("{}: {v}", r.subject_id)));
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.dataset.is_empty() && self.recordings.iter().all(RecordingReport::passed)
    }
}

/// Lists every invariant violation in the dataset. Never fails.
pub fn validate_dataset(d: &Dataset) -> ValidationReport {
    let mut dataset = Vec::new();
    if d.subjects().len() < 2 {
        dataset.push("fewer than 2 subjects".to_string());
    }
    let recordings = d
        .recordings
        .iter()
        .map(|r| RecordingReport { subject_id: r.subject_id().to_string(), violations: r.violations() })
        .collect();
    ValidationReport { dataset, recordings }
}
