//! Heel-strike and toe-off detection from a foot's sagittal angular
//! velocity.
//!
//! The signal alternates high and low peaks. Toe-off is taken at each high
//! peak. Heel-strike is where the signal enters the zero band, scanning
//! backward from the low peak that follows it.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gait_data::SensorId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventDetectorConfig {
    /// Toe-off peaks must reach this fraction of the dominant peak.
    pub high_peak_fraction: f64,
    /// Minimum spacing between toe-off peaks, seconds.
    pub min_peak_separation_s: f64,
    /// Half-width of the zero band, as a fraction of the dominant peak.
    pub zero_band: f64,
    /// Low peaks below this fraction of the dominant peak are treated as noise.
    pub low_peak_min_fraction: f64,
    /// Peaks and heel strikes this close to either end of the signal are
    /// ignored, seconds. Covers the filter's edge transient.
    pub edge_guard_s: f64,
}

impl Default for EventDetectorConfig {
    fn default() -> Self {
        Self { high_peak_fraction: 0.5, min_peak_separation_s: 0.4, zero_band: 0.02, low_peak_min_fraction: 0.1, edge_guard_s: 0.05 }
    }
}

impl EventDetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.high_peak_fraction > 0.0
            && self.high_peak_fraction < 1.0
            && self.min_peak_separation_s > 0.0
            && self.zero_band > 0.0
            && self.low_peak_min_fraction > 0.0
            && self.edge_guard_s >= 0.0
            && self.low_peak_min_fraction < self.high_peak_fraction;
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!("invalid event detector config {self:?}")))
        }
    }
}

/// Detected events of one foot. `detect_events` guarantees that the two
/// lists interleave strictly; hand-built tracks may not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitEventTrack {
    pub foot: SensorId,
    pub heel_strikes: Vec<f64>,
    pub toe_offs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    HeelStrike,
    ToeOff,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::HeelStrike => "heel_strike",
            EventKind::ToeOff => "toe_off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitEvent {
    pub time: f64,
    pub foot: SensorId,
    pub kind: EventKind,
}

impl GaitEventTrack {
    /// Events of this foot in time order.
    pub fn merged(&self) -> Vec<GaitEvent> {
        let mut out: Vec<GaitEvent> = self
            .heel_strikes
            .iter()
            .map(|&time| GaitEvent { time, foot: self.foot, kind: EventKind::HeelStrike })
            .chain(self.toe_offs.iter().map(|&time| GaitEvent { time, foot: self.foot, kind: EventKind::ToeOff }))
            .collect();
        out.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.kind.cmp(&b.kind)));
        out
    }

    /// Strict interleaving of heel strikes and toe-offs.
    pub fn alternates(&self) -> bool {
        let m = self.merged();
        m.windows(2).all(|w| w[0].kind != w[1].kind && w[0].time < w[1].time)
    }
}

fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            // walk across a plateau; it counts once, at its first sample
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Detects the events of one foot.
pub fn detect_events(gyro_y: &[f64], t: &[f64], foot: SensorId, cfg: &EventDetectorConfig) -> Result<GaitEventTrack> {
    cfg.validate()?;
    if gyro_y.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: gyro_y.len() });
    }
    if gyro_y.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("non-finite angular velocity"));
    }
    let (lo, hi) = gyro_y.iter().fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let flip = -lo > hi;
    let x: Vec<f64> = if flip { gyro_y.iter().map(|v| -v).collect() } else { gyro_y.to_vec() };
    let peak = if flip { -lo } else { hi };
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::NoGait);
    }
    let high_thr = cfg.high_peak_fraction * peak;
    let low_min = cfg.low_peak_min_fraction * peak;
    let band = cfg.zero_band * peak;

    let (t_first, t_last) = (t[0], t[t.len() - 1]);
    let maxima: Vec<usize> = local_maxima(&x)
        .into_iter()
        .filter(|&i| t[i] - t_first >= cfg.edge_guard_s && t_last - t[i] >= cfg.edge_guard_s)
        .collect();
    let mut candidates: Vec<usize> = maxima.iter().copied().filter(|&i| x[i] >= high_thr).collect();
    candidates.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut highs: Vec<usize> = Vec::new();
    for c in candidates {
        if highs.iter().all(|&h| (t[c] - t[h]).abs() >= cfg.min_peak_separation_s) {
            highs.push(c);
        }
    }
    if highs.is_empty() {
        return Err(Error::NoGait);
    }
    highs.sort_unstable();

    // segments between high peaks, plus the two open ends
    let mut bounds = Vec::with_capacity(highs.len() + 2);
    bounds.push(0usize);
    bounds.extend(highs.iter().copied());
    bounds.push(x.len() - 1);
    let mut heel_strikes = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let low = maxima
            .iter()
            .copied()
            .filter(|&i| i > a && i < b && x[i] < high_thr && x[i] >= low_min)
            .fold(None, |best: Option<usize>, i| match best {
                Some(j) if x[j] >= x[i] => Some(j),
                _ => Some(i),
            });
        let Some(low) = low else { continue };
        let mut k = low;
        while k > a && x[k] > band {
            k -= 1;
        }
        if k > a && t[k] - t_first >= cfg.edge_guard_s {
            heel_strikes.push(t[k]);
        }
    }

    let track = GaitEventTrack { foot, heel_strikes, toe_offs: highs.iter().map(|&i| t[i]).collect() };
    if !track.alternates() {
        return Err(Error::IrregularGait(format!(
            "{foot}: {} heel strikes and {} toe-offs do not alternate",
            track.heel_strikes.len(),
            track.toe_offs.len()
        )));
    }
    Ok(track)
}

/// One reference-foot stride whose events are in canonical order:
/// `hs < to_contra < hs_contra < to_ref < hs_next`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrideEvents {
    pub reference_foot: SensorId,
    /// Position of `hs` in the reference foot's heel-strike list.
    pub index: usize,
    pub hs: f64,
    pub to_contra: f64,
    pub hs_contra: f64,
    pub to_ref: f64,
    pub hs_next: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedStride {
    pub reference_foot: SensorId,
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub reason: alloc::string::String,
}

/// Both feet's events, checked against the bilateral stride order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilateralEvents {
    /// All events of both feet in time order.
    pub events: Vec<GaitEvent>,
    pub strides: Vec<StrideEvents>,
    pub excluded: Vec<ExcludedStride>,
}

impl BilateralEvents {
    pub fn strides_of(&self, foot: SensorId) -> impl Iterator<Item = &StrideEvents> {
        self.strides.iter().filter(move |s| s.reference_foot == foot)
    }
}

fn within(v: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    v.iter().copied().filter(|&x| x > lo && x < hi).collect()
}

fn check_stride(reference: &GaitEventTrack, contra: &GaitEventTrack, index: usize) -> core::result::Result<StrideEvents, alloc::string::String> {
    let (hs, hs_next) = (reference.heel_strikes[index], reference.heel_strikes[index + 1]);
    let one = |v: Vec<f64>, what: &str| match v.as_slice() {
        [x] => Ok(*x),
        other => Err(format!("expected one {what}, found {}", other.len())),
    };
    let to_contra = one(within(&contra.toe_offs, hs, hs_next), "contralateral toe-off")?;
    let hs_contra = one(within(&contra.heel_strikes, hs, hs_next), "contralateral heel strike")?;
    let to_ref = one(within(&reference.toe_offs, hs, hs_next), "reference toe-off")?;
    if !(hs < to_contra && to_contra < hs_contra && hs_contra < to_ref && to_ref < hs_next) {
        return Err("events out of order".into());
    }
    Ok(StrideEvents { reference_foot: reference.foot, index, hs, to_contra, hs_contra, to_ref, hs_next })
}

/// Checks every stride of both feet against the canonical order. Strides
/// that fail are excluded with a reason; nothing else is affected.
pub fn pair_bilateral(left: &GaitEventTrack, right: &GaitEventTrack) -> BilateralEvents {
    let mut events = left.merged();
    events.extend(right.merged());
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.foot.cmp(&b.foot)).then(a.kind.cmp(&b.kind)));

    let mut strides = Vec::new();
    let mut excluded = Vec::new();
    for (reference, contra) in [(right, left), (left, right)] {
        for index in 0..reference.heel_strikes.len().saturating_sub(1) {
            match check_stride(reference, contra, index) {
                Ok(s) => strides.push(s),
                Err(reason) => excluded.push(ExcludedStride {
                    reference_foot: reference.foot,
                    index,
                    start: reference.heel_strikes[index],
                    end: reference.heel_strikes[index + 1],
                    reason,
                }),
            }
        }
    }
    BilateralEvents { events, strides, excluded }
}
