//! Per-stride phase intervals.
//!
//! For a reference-foot stride `[HS, HS']`:
//!
//! ```text
//! DLS1  = [HS,        TO_contra]
//! SLS   = [TO_contra, HS_contra]
//! DLS2  = [HS_contra, TO_ref]
//! SWING = [TO_ref,    HS']
//! STEP = DLS1 + SLS, STANCE = STEP + DLS2, STRIDE = all four
//! ```

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{BilateralEvents, StrideEvents};
use crate::gait_data::SensorId;
use crate::preprocess::{Channel, PreprocessedRecording};

/// Accepted range of stance duration over stride duration.
pub const STANCE_FRACTION_GATE: (f64, f64) = (0.45, 0.75);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Interval {
    #[serde(rename = "DLS1")]
    Dls1,
    #[serde(rename = "SLS")]
    Sls,
    #[serde(rename = "DLS2")]
    Dls2,
    #[serde(rename = "SWING")]
    Swing,
    #[serde(rename = "STEP")]
    Step,
    #[serde(rename = "STANCE")]
    Stance,
    #[serde(rename = "STRIDE")]
    Stride,
}

impl Interval {
    pub const ALL: [Interval; 7] = [
        Interval::Dls1,
        Interval::Sls,
        Interval::Dls2,
        Interval::Swing,
        Interval::Step,
        Interval::Stance,
        Interval::Stride,
    ];
    pub const PHASES: [Interval; 4] = [Interval::Dls1, Interval::Sls, Interval::Dls2, Interval::Swing];

    pub fn as_str(self) -> &'static str {
        match self {
            Interval::Dls1 => "DLS1",
            Interval::Sls => "SLS",
            Interval::Dls2 => "DLS2",
            Interval::Swing => "SWING",
            Interval::Step => "STEP",
            Interval::Stance => "STANCE",
            Interval::Stride => "STRIDE",
        }
    }

    /// Range of phases (indices into [`Interval::PHASES`]) this interval spans.
    fn phase_range(self) -> core::ops::Range<usize> {
        match self {
            Interval::Dls1 => 0..1,
            Interval::Sls => 1..2,
            Interval::Dls2 => 2..3,
            Interval::Swing => 3..4,
            Interval::Step => 0..2,
            Interval::Stance => 0..3,
            Interval::Stride => 0..4,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Interval::ALL
            .into_iter()
            .find(|i| i.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Validation(alloc::format!("unknown interval {s:?}")))
    }
}

/// Phase boundaries of one stride.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrideSegmentation {
    pub reference_foot: SensorId,
    pub stride_index: usize,
    /// `HS, TO_contra, HS_contra, TO_ref, HS'`.
    pub boundaries: [f64; 5],
}

impl StrideSegmentation {
    pub fn from_events(e: &StrideEvents) -> Self {
        Self {
            reference_foot: e.reference_foot,
            stride_index: e.index,
            boundaries: [e.hs, e.to_contra, e.hs_contra, e.to_ref, e.hs_next],
        }
    }

    /// `(start, end)` in seconds.
    pub fn bounds(&self, interval: Interval) -> (f64, f64) {
        let r = interval.phase_range();
        (self.boundaries[r.start], self.boundaries[r.end])
    }

    /// Durations of DLS1, SLS, DLS2 and SWING.
    pub fn phase_durations(&self) -> [f64; 4] {
        let b = &self.boundaries;
        [b[1] - b[0], b[2] - b[1], b[3] - b[2], b[4] - b[3]]
    }

    /// Composite intervals are sums of their phase durations, so
    /// `DLS1 + SLS + DLS2 + SWING == STRIDE` holds exactly.
    pub fn duration(&self, interval: Interval) -> f64 {
        let p = self.phase_durations();
        p[interval.phase_range()].iter().fold(0.0, |acc, d| acc + d)
    }

    pub fn stance_fraction(&self) -> f64 {
        self.duration(Interval::Stance) / self.duration(Interval::Stride)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Segmentation {
    pub strides: Vec<StrideSegmentation>,
    /// Strides rejected by the stance-fraction gate.
    pub dropped: usize,
}

/// Segments every validated stride of `reference_foot`.
pub fn segment_strides(events: &BilateralEvents, reference_foot: SensorId) -> Segmentation {
    let mut out = Segmentation::default();
    for e in events.strides_of(reference_foot) {
        let seg = StrideSegmentation::from_events(e);
        let f = seg.stance_fraction();
        if f >= STANCE_FRACTION_GATE.0 && f <= STANCE_FRACTION_GATE.1 {
            out.strides.push(seg);
        } else {
            out.dropped += 1;
        }
    }
    out
}

/// Sample windows of one sensor's feature channels over an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseWindow<'a> {
    pub channels: Vec<(Channel, &'a [f64])>,
}

impl PhaseWindow<'_> {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sample index range `[start, end)` covered by `[t0, t1)`.
pub fn sample_range(t: &[f64], sample_rate_hz: f64, t0: f64, t1: f64) -> Result<core::ops::Range<usize>> {
    let (first, last) = match (t.first(), t.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::OutOfSpan { start: t0, end: t1 }),
    };
    if t0 < first || t1 > last + 1.5 / sample_rate_hz || t1 <= t0 {
        return Err(Error::OutOfSpan { start: t0, end: t1 });
    }
    let a = t.partition_point(|&x| x < t0);
    let b = t.partition_point(|&x| x < t1);
    if b <= a {
        return Err(Error::OutOfSpan { start: t0, end: t1 });
    }
    Ok(a..b)
}

/// Restricts the feature channels of `sensor` to `interval` of `seg`:
/// six channels for the pelvis, four derived channels for a foot.
pub fn extract_phase_window<'a>(
    pr: &'a PreprocessedRecording,
    seg: &StrideSegmentation,
    interval: Interval,
    sensor: SensorId,
) -> Result<PhaseWindow<'a>> {
    let signals = pr.sensor(sensor);
    let (t0, t1) = seg.bounds(interval);
    let range = sample_range(&signals.t, pr.sample_rate_hz, t0, t1)?;
    let names: &[Channel] = if sensor.is_foot() { &Channel::FOOT_FEATURES } else { &Channel::PELVIS_FEATURES };
    let channels = names
        .iter()
        .map(|&c| {
            let full = signals.channel(c).ok_or_else(|| Error::validation("missing derived channel"))?;
            Ok((c, &full[range.clone()]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseWindow { channels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{pair_bilateral, GaitEventTrack};
    use alloc::vec;

    fn example() -> StrideSegmentation {
        StrideSegmentation {
            reference_foot: SensorId::RightFoot,
            stride_index: 0,
            boundaries: [0.0, 0.10, 0.50, 0.60, 1.00],
        }
    }

    #[test]
    fn phase_durations_of_the_worked_example() {
        let s = example();
        let want = [
            (Interval::Dls1, 0.10),
            (Interval::Sls, 0.40),
            (Interval::Dls2, 0.10),
            (Interval::Swing, 0.40),
            (Interval::Step, 0.50),
            (Interval::Stance, 0.60),
            (Interval::Stride, 1.00),
        ];
        for (i, d) in want {
            assert!((s.duration(i) - d).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn composites_add_exactly() {
        let s = StrideSegmentation { boundaries: [3.137, 3.2511, 3.70003, 3.8119, 4.2201], ..example() };
        let [a, b, c, d] = s.phase_durations();
        assert_eq!(s.duration(Interval::Step), a + b);
        assert_eq!(s.duration(Interval::Stance), s.duration(Interval::Step) + c);
        assert_eq!(s.duration(Interval::Stride), s.duration(Interval::Stance) + d);
    }

    #[test]
    fn low_stance_fraction_is_gated_out() {
        // stance 0.30 of a 1 s stride
        let r = GaitEventTrack { foot: SensorId::RightFoot, heel_strikes: vec![0.0, 1.0], toe_offs: vec![0.3] };
        let l = GaitEventTrack { foot: SensorId::LeftFoot, heel_strikes: vec![0.2], toe_offs: vec![0.05] };
        let b = pair_bilateral(&l, &r);
        assert_eq!(b.strides.len(), 1);
        let seg = segment_strides(&b, SensorId::RightFoot);
        assert!(seg.strides.is_empty());
        assert_eq!(seg.dropped, 1);
    }

    #[test]
    fn interval_names_round_trip() {
        for i in Interval::ALL {
            assert_eq!(i.as_str().parse::<Interval>().unwrap(), i);
        }
        assert!("STRIDES".parse::<Interval>().is_err());
    }

    #[test]
    fn sample_range_rejects_outside_span() {
        let t: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        assert_eq!(sample_range(&t, 1000.0, 0.1, 0.5).unwrap(), 100..500);
        assert_eq!(sample_range(&t, 1000.0, 0.0, 1.0).unwrap(), 0..1000);
        assert!(sample_range(&t, 1000.0, 0.5, 1.2).is_err());
        assert!(sample_range(&t, 1000.0, -0.1, 0.5).is_err());
    }
}
