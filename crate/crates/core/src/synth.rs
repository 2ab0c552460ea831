//! Synthetic walking recordings with exactly known gait events.
//!
//! The foot gyroscope Y channel is assembled from half-sine lobes per stride:
//! a negative lobe ending at heel strike and a positive low lobe starting
//! there (so the signal crosses zero exactly at heel strike), a high lobe
//! centred on toe-off, and a negative swing lobe sized to cancel the high
//! lobe's area. Every other channel is a three-harmonic series locked to the
//! stride phase, with per-subject amplitudes and phases.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::GaitEventTrack;
use crate::gait_data::{ImuSample, Recording, SensorId};
use crate::rng::{derive_seed, seeded, Rng};
use crate::segmentation::StrideSegmentation;

pub const HARMONICS: usize = 3;
pub const CADENCE_RANGE: (f64, f64) = (0.7, 1.3);
pub const DLS_RANGE: (f64, f64) = (0.08, 0.14);
pub const STANCE_RANGE: (f64, f64) = (0.55, 0.65);
pub const ASYMMETRY_RANGE: (f64, f64) = (0.0, 0.1);
pub const NOISE_RANGE: (f64, f64) = (0.0, 0.2);
pub const DEFAULT_NOISE: f64 = 0.1;

/// Quiet time before the first heel strike and after the last one.
const LEAD_S: f64 = 0.4;

/// Correlated stride-to-stride waveform variability on the harmonic
/// channels: AR(1) noise with this time constant, scaled to
/// `COLORED_GAIN * noise_sigma` of the channel RMS.
pub const COLORED_TAU_S: f64 = 0.04;
pub const COLORED_GAIN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub offset: f64,
    pub harmonics: [Harmonic; HARMONICS],
}

impl ChannelModel {
    fn rms(&self) -> f64 {
        libm::sqrt(self.harmonics.iter().map(|h| h.amplitude * h.amplitude / 2.0).sum())
    }

    fn eval(&self, phase: f64, gain: f64) -> f64 {
        let mut v = self.offset;
        for (k, h) in self.harmonics.iter().enumerate() {
            v += gain * h.amplitude * libm::sin(2.0 * PI * (k + 1) as f64 * phase + h.phase);
        }
        v
    }
}

/// Shape of the foot gyroscope Y template. Widths are fractions of the
/// stride period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GyroTemplate {
    pub peak: f64,
    /// Low-lobe amplitude over the high peak.
    pub low_ratio: f64,
    pub low_width: f64,
    pub high_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: String,
    /// Strides per second.
    pub cadence_hz: f64,
    /// Mean stance over stride duration of the two feet.
    pub stance_fraction: f64,
    /// Fraction of the stride spent in each double-support phase.
    pub dls_fraction: f64,
    pub left_right_asymmetry: f64,
    /// Relative noise level. Sets the sensor noise, the stride-to-stride
    /// amplitude spread and the timing jitter.
    pub noise_sigma: f64,
    pub gyro: GyroTemplate,
    /// Indexed by sensor, then `acc x, y, z, gyro x, y, z`. The foot gyro Y
    /// entries are unused.
    pub channels: [[ChannelModel; 6]; 3],
}

impl SubjectProfile {
    pub fn sls_fraction(&self) -> f64 {
        self.stance_fraction - 2.0 * self.dls_fraction
    }

    pub fn swing_fraction(&self) -> f64 {
        1.0 - self.stance_fraction
    }

    pub fn with_noise(mut self, noise_sigma: f64) -> Self {
        self.noise_sigma = noise_sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let within = |v: f64, r: (f64, f64)| v >= r.0 && v <= r.1;
        let ok = within(self.cadence_hz, CADENCE_RANGE)
            && within(self.stance_fraction, STANCE_RANGE)
            && within(self.dls_fraction, DLS_RANGE)
            && within(self.left_right_asymmetry, ASYMMETRY_RANGE)
            && within(self.noise_sigma, NOISE_RANGE)
            && (2.0 * self.dls_fraction + self.sls_fraction() + self.swing_fraction() - 1.0).abs() < 1e-12
            && self.sls_fraction() > 0.0
            && self.gyro.peak > 0.0
            && self.gyro.low_ratio > 0.0
            && self.gyro.low_ratio < 0.5;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("subject profile {} out of range", self.subject_id)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub profiles: Vec<SubjectProfile>,
    /// Candidates drawn, including rejected ones.
    pub attempts: usize,
}

/// Smallest cadence gap between any two generated subjects.
pub fn cadence_gap(n_subjects: usize) -> f64 {
    let span = CADENCE_RANGE.1 - CADENCE_RANGE.0;
    (0.25 * span / n_subjects as f64).min(0.05)
}

fn uniform(rng: &mut Rng, r: (f64, f64)) -> f64 {
    r.0 + (r.1 - r.0) * rng.random::<f64>()
}

fn channel(rng: &mut Rng, scale: (f64, f64), offset: f64) -> ChannelModel {
    let base = uniform(rng, scale);
    let harmonics = core::array::from_fn(|k| Harmonic {
        amplitude: base * uniform(rng, (0.3, 1.0)) / (k + 1) as f64,
        phase: uniform(rng, (0.0, 2.0 * PI)),
    });
    ChannelModel { offset, harmonics }
}

fn draw_profile(rng: &mut Rng, subject_id: String) -> SubjectProfile {
    let cadence_hz = uniform(rng, CADENCE_RANGE);
    let dls_fraction = uniform(rng, DLS_RANGE);
    let left_right_asymmetry = uniform(rng, ASYMMETRY_RANGE);
    let gyro = GyroTemplate {
        peak: uniform(rng, (3.0, 6.0)),
        low_ratio: uniform(rng, (0.22, 0.35)),
        low_width: uniform(rng, (0.05, 0.07)),
        high_width: uniform(rng, (0.10, 0.13)),
    };
    let channels = core::array::from_fn(|_| {
        core::array::from_fn(|c| match c {
            0 | 1 => channel(rng, (1.0, 4.0), 0.0),
            2 => channel(rng, (1.0, 4.0), 9.81),
            _ => channel(rng, (0.5, 2.0), 0.0),
        })
    });
    SubjectProfile {
        subject_id,
        cadence_hz,
        stance_fraction: 0.5 + dls_fraction,
        dls_fraction,
        left_right_asymmetry,
        noise_sigma: DEFAULT_NOISE,
        gyro,
        channels,
    }
}

/// Draws `n_subjects` profiles named `S01`, `S02`, ... . A candidate is
/// rejected when its cadence lies within [`cadence_gap`] of an accepted one.
pub fn generate_profiles(n_subjects: usize, seed: u64) -> Result<Profiles> {
    if n_subjects < 2 {
        return Err(Error::validation("need at least 2 subjects"));
    }
    let width = digits(n_subjects).max(2);
    let gap = cadence_gap(n_subjects);
    let mut rng = seeded(seed);
    let mut profiles: Vec<SubjectProfile> = Vec::with_capacity(n_subjects);
    let mut attempts = 0;
    while profiles.len() < n_subjects {
        attempts += 1;
        let id = format!("S{:0width$}", profiles.len() + 1);
        let p = draw_profile(&mut rng, id);
        if profiles.iter().all(|q| (q.cadence_hz - p.cadence_hz).abs() >= gap) {
            profiles.push(p);
        }
    }
    Ok(Profiles { profiles, attempts })
}

fn digits(mut n: usize) -> usize {
    let mut w = 1;
    while n >= 10 {
        n /= 10;
        w += 1;
    }
    w
}

/// Exact events used to build a recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub subject_id: String,
    pub left: GaitEventTrack,
    pub right: GaitEventTrack,
    /// Right-referenced strides, then left-referenced.
    pub strides: Vec<StrideSegmentation>,
}

impl GroundTruth {
    pub fn track(&self, foot: SensorId) -> &GaitEventTrack {
        match foot {
            SensorId::LeftFoot => &self.left,
            _ => &self.right,
        }
    }
}

/// Timing of one right-referenced stride.
#[derive(Debug, Clone, Copy)]
struct StrideTiming {
    hs: f64,
    period: f64,
    to_left: f64,
    hs_left: f64,
    to_right: f64,
    /// Stride-to-stride gain on every channel.
    gain: f64,
}

fn clipped_normal(rng: &mut Rng, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma * z.clamp(-3.0, 3.0)
}

fn timeline(p: &SubjectProfile, duration_s: f64, rng: &mut Rng) -> Vec<StrideTiming> {
    let period = 1.0 / p.cadence_hz;
    let a = p.left_right_asymmetry;
    let s_right = p.stance_fraction + 0.05 * a;
    let d1 = p.dls_fraction * (1.0 + a);
    let d2 = p.dls_fraction * (1.0 - a);
    let jitter = 0.02 * p.noise_sigma;
    let mut out = Vec::new();
    let mut hs = LEAD_S;
    loop {
        let t = period * (1.0 + clipped_normal(rng, 0.1 * p.noise_sigma));
        let d1_i = d1 + clipped_normal(rng, jitter);
        let d2_i = d2 + clipped_normal(rng, jitter);
        let s_i = s_right + clipped_normal(rng, jitter);
        let gain = 1.0 + clipped_normal(rng, 0.5 * p.noise_sigma);
        if hs + LEAD_S > duration_s {
            break;
        }
        out.push(StrideTiming {
            hs,
            period: t,
            to_left: hs + d1_i * t,
            hs_left: hs + (s_i - d2_i) * t,
            to_right: hs + s_i * t,
            gain,
        });
        hs += t;
    }
    out
}

fn half_sine(x: &mut [f64], fs: f64, start: f64, end: f64, amplitude: f64) {
    let width = end - start;
    let first = libm::ceil(start * fs).max(0.0) as usize;
    let mut k = first;
    while k < x.len() {
        let t = k as f64 / fs;
        if t > end {
            break;
        }
        x[k] += amplitude * libm::sin(PI * (t - start) / width);
        k += 1;
    }
}

/// Heel-strike times, toe-off times and per-stride gains of one foot.
struct FootEvents {
    hs: Vec<(f64, f64)>,
    to: Vec<(f64, f64, f64)>,
}

fn foot_events(strides: &[StrideTiming], foot: SensorId) -> FootEvents {
    // The last entry only marks the closing heel strike of the right foot.
    let walked = &strides[..strides.len() - 1];
    match foot {
        SensorId::LeftFoot => FootEvents {
            hs: walked.iter().map(|s| (s.hs_left, s.gain)).collect(),
            to: walked.iter().map(|s| (s.to_left, s.period, s.gain)).collect(),
        },
        _ => FootEvents {
            hs: strides.iter().map(|s| (s.hs, s.gain)).collect(),
            to: walked.iter().map(|s| (s.to_right, s.period, s.gain)).collect(),
        },
    }
}

fn gyro_y(p: &SubjectProfile, ev: &FootEvents, n: usize, fs: f64) -> Vec<f64> {
    let g = &p.gyro;
    let mut x = alloc::vec![0.0; n];
    for &(hs, gain) in &ev.hs {
        let period = ev.to.iter().map(|e| e.1).next().unwrap_or(1.0 / p.cadence_hz);
        let w = g.low_width * period;
        let a = g.low_ratio * g.peak * gain;
        half_sine(&mut x, fs, hs - w, hs, -a);
        half_sine(&mut x, fs, hs, hs + w, a);
    }
    for &(to, period, gain) in &ev.to {
        let wh = g.high_width * period;
        let peak = g.peak * gain;
        half_sine(&mut x, fs, to - wh / 2.0, to + wh / 2.0, peak);
        // swing lobe up to the next heel strike's pre-strike lobe
        let next_hs = ev.hs.iter().map(|h| h.0).find(|&h| h > to).unwrap_or(to + (1.0 - p.stance_fraction) * period);
        let swing_start = to + wh / 2.0;
        let swing_end = next_hs - g.low_width * period;
        if swing_end > swing_start {
            half_sine(&mut x, fs, swing_start, swing_end, -peak * wh / (swing_end - swing_start));
        }
    }
    x
}

/// Continuous stride phase (in strides) and interpolated gain at time `t`.
fn phase_and_gain(strides: &[StrideTiming], t: f64, offset: f64) -> (f64, f64) {
    let i = strides.partition_point(|s| s.hs <= t).saturating_sub(1);
    let s = &strides[i];
    let next_gain = strides.get(i + 1).map_or(s.gain, |n| n.gain);
    let u = (t - s.hs) / s.period;
    let w = u.clamp(0.0, 1.0);
    (i as f64 + u - offset, s.gain * (1.0 - w) + next_gain * w)
}

/// Recording length that yields about `strides` usable strides per
/// reference foot once boundary strides without a partner are dropped.
pub fn duration_for_strides(profile: &SubjectProfile, strides: usize) -> f64 {
    (strides as f64 + 1.5) / profile.cadence_hz + 2.0 * LEAD_S
}

/// Builds one recording sampled at `sample_rate_hz` on a shared time base.
pub fn synthesize_recording(
    profile: &SubjectProfile,
    duration_s: f64,
    sample_rate_hz: f64,
    seed: u64,
) -> Result<(Recording, GroundTruth)> {
    profile.validate()?;
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(Error::validation("sample rate must be positive"));
    }
    let min_duration = 3.0 / profile.cadence_hz + 2.0 * LEAD_S;
    if duration_s.is_nan() || duration_s < min_duration {
        return Err(Error::Validation(format!(
            "duration {duration_s} s shorter than three strides ({min_duration:.3} s)"
        )));
    }
    let mut timing_rng = seeded(derive_seed(seed, 1));
    let strides = timeline(profile, duration_s, &mut timing_rng);
    let n = libm::floor(duration_s * sample_rate_hz) as usize + 1;
    let fs = sample_rate_hz;
    let mut noise_rng = seeded(derive_seed(seed, 2));
    let nominal_left = profile.stance_fraction - profile.dls_fraction;
    let a = profile.left_right_asymmetry;

    let mut streams: [Vec<ImuSample>; 3] = Default::default();
    for sensor in SensorId::ALL {
        let models = &profile.channels[sensor.index()];
        let (offset, scale) = match sensor {
            SensorId::LeftFoot => (nominal_left, 1.0 - a),
            SensorId::RightFoot => (0.0, 1.0 + a),
            SensorId::Pelvis => (0.0, 1.0),
        };
        let gyro_template = sensor.is_foot().then(|| gyro_y(profile, &foot_events(&strides, sensor), n, fs));
        let mut samples = Vec::with_capacity(n);
        let rho = libm::exp(-1.0 / (COLORED_TAU_S * fs));
        let innovation = libm::sqrt(1.0 - rho * rho);
        let mut colored = [0.0; 6];
        for c in colored.iter_mut() {
            *c = clipped_normal(&mut noise_rng, 1.0);
        }
        for k in 0..n {
            let t = k as f64 / fs;
            let (phase, gain) = phase_and_gain(&strides, t, offset);
            let mut v = [0.0; 6];
            for (c, m) in models.iter().enumerate() {
                colored[c] = rho * colored[c] + innovation * clipped_normal(&mut noise_rng, 1.0);
                v[c] = match (&gyro_template, c) {
                    (Some(g), 4) => g[k] + clipped_normal(&mut noise_rng, profile.noise_sigma * profile.gyro.peak),
                    _ => {
                        let amplitude = m.rms() * scale;
                        m.eval(phase, gain * scale)
                            + profile.noise_sigma * amplitude * (COLORED_GAIN * colored[c])
                            + clipped_normal(&mut noise_rng, profile.noise_sigma * amplitude)
                    }
                };
            }
            samples.push(ImuSample { t, acc: [v[0], v[1], v[2]], gyro: [v[3], v[4], v[5]] });
        }
        streams[sensor.index()] = samples;
    }
    let recording = Recording::new(profile.subject_id.clone(), sample_rate_hz, streams)?;
    Ok((recording, ground_truth(profile, &strides)))
}

fn ground_truth(profile: &SubjectProfile, strides: &[StrideTiming]) -> GroundTruth {
    let walked = &strides[..strides.len() - 1];
    let right = GaitEventTrack {
        foot: SensorId::RightFoot,
        heel_strikes: strides.iter().map(|s| s.hs).collect(),
        toe_offs: walked.iter().map(|s| s.to_right).collect(),
    };
    let left = GaitEventTrack {
        foot: SensorId::LeftFoot,
        heel_strikes: walked.iter().map(|s| s.hs_left).collect(),
        toe_offs: walked.iter().map(|s| s.to_left).collect(),
    };
    let mut segs = Vec::new();
    for (i, w) in strides.windows(2).enumerate() {
        segs.push(StrideSegmentation {
            reference_foot: SensorId::RightFoot,
            stride_index: i,
            boundaries: [w[0].hs, w[0].to_left, w[0].hs_left, w[0].to_right, w[1].hs],
        });
    }
    for (i, w) in walked.windows(2).enumerate() {
        segs.push(StrideSegmentation {
            reference_foot: SensorId::LeftFoot,
            stride_index: i,
            boundaries: [w[0].hs_left, w[0].to_right, w[1].hs, w[1].to_left, w[1].hs_left],
        });
    }
    GroundTruth { subject_id: profile.subject_id.clone(), left, right, strides: segs }
}
