//! Zero-phase band-pass filtering, MinMax scaling and planar magnitudes.
//!
//! The band-pass is a digital Butterworth design: analog low-pass
//! prototype, low-pass to band-pass transform, then the bilinear transform
//! with pre-warped band edges. It is realised as second-order sections.
//! [`filtfilt`] runs the sections forward and then backward in time, so
//! the net phase is zero and the magnitude response is squared.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gait_data::{Recording, SensorId, MIN_COMMON_WINDOW_S};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub order: usize,
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub sample_rate_hz: f64,
}

impl FilterSpec {
    /// Third order, 0.5-15 Hz.
    pub fn with_rate(sample_rate_hz: f64) -> Self {
        Self { order: 3, low_cut_hz: 0.5, high_cut_hz: 15.0, sample_rate_hz }
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate_hz / 2.0;
        if self.order == 0 {
            return Err(Error::validation("filter order must be positive"));
        }
        if !(self.low_cut_hz > 0.0 && self.low_cut_hz < self.high_cut_hz && self.high_cut_hz < nyquist) {
            return Err(Error::Validation(alloc::format!(
                "invalid band {}-{} Hz for sample rate {} Hz: need 0 < low < high < fs/2",
                self.low_cut_hz,
                self.high_cut_hz,
                self.sample_rate_hz
            )));
        }
        Ok(())
    }
}

/// One biquad: `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + z_inv * self.b[1] + z2 * self.b[2];
        let den = self.a[0] + z_inv * self.a[1] + z2 * self.a[2];
        num / den
    }

    /// Steady-state direct-form-II-transposed state for a unit step input.
    fn step_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let g = (b0 + b1 + b2) / (1.0 + a1 + a2);
        let z1 = b2 - a2 * g;
        [b1 - a1 * g + z1, z1]
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

/// A designed digital filter as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCoefficients {
    pub sections: Vec<Biquad>,
}

impl FilterCoefficients {
    /// Order of the overall transfer function.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Numerator and denominator of the overall transfer function in powers
    /// of `z^-1`.
    pub fn transfer_function(&self) -> (Vec<f64>, Vec<f64>) {
        let mut b = vec![1.0];
        let mut a = vec![1.0];
        for s in &self.sections {
            b = poly_mul(&b, &s.b);
            a = poly_mul(&a, &s.a);
        }
        (b, a)
    }

    /// `|H(e^{jw})|` of a single pass at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        let z_inv = Complex64::new(libm::cos(w), -libm::sin(w));
        self.sections.iter().map(|s| s.response(z_inv)).product::<Complex64>().norm()
    }

    /// Edge padding used by [`filtfilt`].
    pub fn pad_len(&self) -> usize {
        3 * (self.order() + 1)
    }

    /// Runs the cascade over `x` in place, starting from `state`.
    fn run(&self, x: &mut [f64], mut state: Vec<[f64; 2]>) {
        for (s, z) in self.sections.iter().zip(state.iter_mut()) {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let (mut z0, mut z1) = (z[0], z[1]);
            for v in x.iter_mut() {
                let xin = *v;
                let y = b0 * xin + z0;
                z0 = b1 * xin - a1 * y + z1;
                z1 = b2 * xin - a2 * y;
                *v = y;
            }
        }
    }

    /// Per-section initial state for a step of unit height at the input.
    fn step_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let [z0, z1] = s.step_state();
                let out = [z0 * scale, z1 * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Designs a Butterworth band-pass of `spec.order` (the transfer function
/// has twice that order).
pub fn design_bandpass(spec: &FilterSpec) -> Result<FilterCoefficients> {
    spec.validate()?;
    let n = spec.order;
    let fs2 = 2.0 * spec.sample_rate_hz;
    let warp = |f: f64| fs2 * libm::tan(PI * f / spec.sample_rate_hz);
    let (w1, w2) = (warp(spec.low_cut_hz), warp(spec.high_cut_hz));
    let bw = w2 - w1;
    let w0_sq = w1 * w2;

    // analog band-pass poles
    let mut analog = Vec::with_capacity(2 * n);
    for k in 0..n {
        let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
        let p = Complex64::new(libm::cos(theta), libm::sin(theta)) * bw;
        let disc = (p * p - 4.0 * w0_sq).sqrt();
        analog.push((p + disc) * 0.5);
        analog.push((p - disc) * 0.5);
    }
    // band-pass gain bw^n, n zeros at s = 0 and n at infinity
    let mut gain = Complex64::new(libm::pow(bw, n as f64), 0.0);
    for _ in 0..n {
        gain *= fs2;
    }
    let mut digital = Vec::with_capacity(2 * n);
    for p in &analog {
        gain /= fs2 - p;
        digital.push((fs2 + p) / (fs2 - p));
    }

    let imag_eps = 1e-12;
    let mut complex: Vec<Complex64> = digital.iter().copied().filter(|p| p.im > imag_eps).collect();
    let mut real: Vec<f64> = digital.iter().filter(|p| p.im.abs() <= imag_eps).map(|p| p.re).collect();
    complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    real.sort_by(f64::total_cmp);

    let mut sections = Vec::with_capacity(n);
    for p in &complex {
        sections.push(Biquad { b: [1.0, 0.0, -1.0], a: [1.0, -2.0 * p.re, p.norm_sqr()] });
    }
    for pair in real.chunks(2) {
        let a = match pair {
            [p, q] => [1.0, -(p + q), p * q],
            [p] => [1.0, -p, 0.0],
            _ => unreachable!(),
        };
        sections.push(Biquad { b: [1.0, 0.0, -1.0], a });
    }
    let k = gain.re;
    for v in sections[0].b.iter_mut() {
        *v *= k;
    }
    Ok(FilterCoefficients { sections })
}

/// Forward-backward filtering with odd-reflection edge padding and
/// steady-state initial conditions.
pub fn filtfilt(coeffs: &FilterCoefficients, x: &[f64]) -> Result<Vec<f64>> {
    let pad = coeffs.pad_len();
    if x.len() <= pad {
        return Err(Error::TooShort { needed: pad, got: x.len() });
    }
    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    let zi = coeffs.step_states();
    let scaled = |v: f64| zi.iter().map(|z| [z[0] * v, z[1] * v]).collect::<Vec<_>>();

    let x0 = ext[0];
    coeffs.run(&mut ext, scaled(x0));
    ext.reverse();
    let y0 = ext[0];
    coeffs.run(&mut ext, scaled(y0));
    ext.reverse();
    Ok(ext[pad..pad + n].to_vec())
}

/// Affine map onto `[0, 1]`. A constant input maps to all zeros.
pub fn minmax_scale(x: &[f64]) -> Vec<f64> {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range.is_nan() || range <= 0.0 {
        return vec![0.0; x.len()];
    }
    x.iter().map(|&v| (v - lo) / range).collect()
}

/// Element-wise `sqrt(rx^2 + ry^2)`.
pub fn xy_magnitude(rx: &[f64], ry: &[f64]) -> Result<Vec<f64>> {
    if rx.len() != ry.len() {
        return Err(Error::DimensionMismatch { expected: rx.len(), got: ry.len() });
    }
    Ok(rx.iter().zip(ry).map(|(x, y)| libm::hypot(*x, *y)).collect())
}

/// Named signals available after preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    AccX,
    AccY,
    AccZ,
    GyroX,
    GyroY,
    GyroZ,
    AccMagXy,
    GyroMagXy,
}

impl Channel {
    pub const PELVIS_FEATURES: [Channel; 6] =
        [Channel::AccX, Channel::AccY, Channel::AccZ, Channel::GyroX, Channel::GyroY, Channel::GyroZ];
    pub const FOOT_FEATURES: [Channel; 4] = [Channel::AccMagXy, Channel::AccZ, Channel::GyroMagXy, Channel::GyroZ];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::AccX => "acc_x",
            Channel::AccY => "acc_y",
            Channel::AccZ => "acc_z",
            Channel::GyroX => "gyro_x",
            Channel::GyroY => "gyro_y",
            Channel::GyroZ => "gyro_z",
            Channel::AccMagXy => "acc_mag_xy",
            Channel::GyroMagXy => "gyro_mag_xy",
        }
    }
}

/// One sensor after preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSignals {
    pub t: Vec<f64>,
    /// acc (scaled to [0, 1]) then gyro (filtered), X Y Z each.
    pub axes: [Vec<f64>; 6],
    /// Feet only.
    pub acc_mag_xy: Option<Vec<f64>>,
    pub gyro_mag_xy: Option<Vec<f64>>,
}

impl SensorSignals {
    pub fn channel(&self, c: Channel) -> Option<&[f64]> {
        match c {
            Channel::AccX => Some(&self.axes[0]),
            Channel::AccY => Some(&self.axes[1]),
            Channel::AccZ => Some(&self.axes[2]),
            Channel::GyroX => Some(&self.axes[3]),
            Channel::GyroY => Some(&self.axes[4]),
            Channel::GyroZ => Some(&self.axes[5]),
            Channel::AccMagXy => self.acc_mag_xy.as_deref(),
            Channel::GyroMagXy => self.gyro_mag_xy.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedRecording {
    pub subject_id: alloc::string::String,
    pub sample_rate_hz: f64,
    pub sensors: [SensorSignals; 3],
}

impl PreprocessedRecording {
    pub fn sensor(&self, id: SensorId) -> &SensorSignals {
        &self.sensors[id.index()]
    }
}

/// Filter every raw channel, MinMax-scale the accelerometer, then add the
/// XY magnitudes for both feet.
pub fn preprocess_recording(r: &Recording, spec: &FilterSpec) -> Result<PreprocessedRecording> {
    let coeffs = design_bandpass(spec)?;
    let min_len = libm::ceil(MIN_COMMON_WINDOW_S * r.sample_rate_hz()) as usize;
    let mut sensors = Vec::with_capacity(3);
    for id in SensorId::ALL {
        let stream = r.stream(id);
        if stream.len() < min_len {
            return Err(Error::TooShort { needed: min_len, got: stream.len() });
        }
        let t: Vec<f64> = stream.iter().map(|s| s.t).collect();
        let mut axes: [Vec<f64>; 6] = Default::default();
        for (k, axis) in axes.iter_mut().enumerate() {
            let raw: Vec<f64> =
                stream.iter().map(|s| if k < 3 { s.acc[k] } else { s.gyro[k - 3] }).collect();
            let filtered = filtfilt(&coeffs, &raw)?;
            *axis = if k < 3 { minmax_scale(&filtered) } else { filtered };
        }
        let (acc_mag_xy, gyro_mag_xy) = if id.is_foot() {
            (Some(xy_magnitude(&axes[0], &axes[1])?), Some(xy_magnitude(&axes[3], &axes[4])?))
        } else {
            (None, None)
        };
        sensors.push(SensorSignals { t, axes, acc_mag_xy, gyro_mag_xy });
    }
    let sensors: [SensorSignals; 3] = sensors.try_into().map_err(|_| Error::validation("sensor count"))?;
    Ok(PreprocessedRecording { subject_id: r.subject_id().into(), sample_rate_hz: r.sample_rate_hz(), sensors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minmax_examples() {
        assert_eq!(minmax_scale(&[1.0, 2.0, 3.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_scale(&[-5.0, 0.0, 5.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_scale(&[4.0, 4.0, 4.0]), vec![0.0; 3]);
    }

    #[test]
    fn magnitude_examples() {
        assert_eq!(xy_magnitude(&[3.0], &[4.0]).unwrap(), vec![5.0]);
        assert_eq!(xy_magnitude(&[0.0], &[0.0]).unwrap(), vec![0.0]);
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let c: Vec<f64> = t.iter().map(|&v| libm::cos(v)).collect();
        let s: Vec<f64> = t.iter().map(|&v| libm::sin(v)).collect();
        for m in xy_magnitude(&c, &s).unwrap() {
            assert!((m - 1.0).abs() < 1e-12);
        }
        assert!(xy_magnitude(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_band_is_rejected() {
        let mut spec = FilterSpec::with_rate(1000.0);
        spec.high_cut_hz = 600.0;
        assert!(design_bandpass(&spec).is_err());
        spec.high_cut_hz = 0.2;
        assert!(design_bandpass(&spec).is_err());
        spec = FilterSpec { order: 0, ..FilterSpec::with_rate(1000.0) };
        assert!(design_bandpass(&spec).is_err());
    }

    #[test]
    fn third_order_design_has_three_sections_and_six_poles() {
        let c = design_bandpass(&FilterSpec::with_rate(1000.0)).unwrap();
        assert_eq!(c.sections.len(), 3);
        let (b, a) = c.transfer_function();
        assert_eq!((b.len(), a.len()), (7, 7));
        assert_eq!(c.pad_len(), 21);
    }

    #[test]
    fn filtfilt_rejects_short_input() {
        let c = design_bandpass(&FilterSpec::with_rate(1000.0)).unwrap();
        assert_eq!(filtfilt(&c, &[0.0; 21]), Err(Error::TooShort { needed: 21, got: 21 }));
        assert_eq!(filtfilt(&c, &[0.0; 22]).unwrap().len(), 22);
    }

    #[test]
    fn constant_input_is_rejected_by_the_band() {
        let c = design_bandpass(&FilterSpec::with_rate(1000.0)).unwrap();
        let y = filtfilt(&c, &[7.0; 4000]).unwrap();
        for v in &y[1000..3000] {
            assert!(v.abs() < 1e-6, "{v}");
        }
    }
}
