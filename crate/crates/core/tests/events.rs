use gaitid_core::events::{detect_events, pair_bilateral, EventDetectorConfig, GaitEventTrack};
use gaitid_core::pipeline::{analyze_recording, PipelineConfig};
use gaitid_core::preprocess::{preprocess_recording, FilterSpec};
use gaitid_core::synth::{generate_profiles, synthesize_recording, SubjectProfile};
use gaitid_core::{Error, SensorId};
use proptest::prelude::*;

const FS: f64 = 1000.0;

fn nominal() -> SubjectProfile {
    let mut p = generate_profiles(2, 21).unwrap().profiles.remove(0);
    p.cadence_hz = 1.0;
    p.dls_fraction = 0.1;
    p.stance_fraction = 0.6;
    p.left_right_asymmetry = 0.0;
    p.noise_sigma = 0.0;
    p
}

/// Filtered sagittal angular velocity of one foot and its time base.
fn foot_gyro(p: &SubjectProfile, duration: f64, seed: u64, foot: SensorId) -> (Vec<f64>, Vec<f64>, GaitEventTrack) {
    let (rec, gt) = synthesize_recording(p, duration, FS, seed).unwrap();
    let pre = preprocess_recording(&rec, &FilterSpec::with_rate(FS)).unwrap();
    let s = pre.sensor(foot);
    (s.axes[4].clone(), s.t.clone(), gt.track(foot).clone())
}

/// Largest distance from a true event to its nearest detection, and the
/// number of detections with no true event within 50 ms.
fn compare(truth: &[f64], found: &[f64]) -> (f64, usize) {
    let nearest = |v: f64, set: &[f64]| set.iter().map(|x| (x - v).abs()).fold(f64::INFINITY, f64::min);
    let worst = truth.iter().map(|&v| nearest(v, found)).fold(0.0, f64::max);
    let false_events = found.iter().filter(|&&v| nearest(v, truth) > 0.05).count();
    (worst, false_events)
}

#[test]
fn noiseless_walk_recovers_every_event_within_5_ms() {
    let profiles = generate_profiles(6, 3).unwrap();
    for (i, p) in profiles.profiles.iter().enumerate() {
        let p = p.clone().with_noise(0.0);
        let (rec, gt) = synthesize_recording(&p, 10.0, FS, i as u64).unwrap();
        let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
        for (found, truth) in [(&a.left, &gt.left), (&a.right, &gt.right)] {
            let (hs, fh) = compare(&truth.heel_strikes, &found.heel_strikes);
            let (to, ft) = compare(&truth.toe_offs, &found.toe_offs);
            assert!(hs <= 0.005 && to <= 0.005, "{}: hs {hs} to {to}", p.subject_id);
            assert_eq!(fh + ft, 0);
        }
    }
}

#[test]
fn sign_flip_leaves_event_times_unchanged() {
    let (x, t, _) = foot_gyro(&nominal().with_noise(0.1), 8.0, 4, SensorId::LeftFoot);
    let cfg = EventDetectorConfig::default();
    let a = detect_events(&x, &t, SensorId::LeftFoot, &cfg).unwrap();
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let b = detect_events(&neg, &t, SensorId::LeftFoot, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn toe_off_count_over_ten_seconds_at_one_stride_per_second() {
    for seed in 0..5 {
        let (x, t, _) = foot_gyro(&nominal().with_noise(0.1), 10.0, seed, SensorId::RightFoot);
        let track = detect_events(&x, &t, SensorId::RightFoot, &Default::default()).unwrap();
        assert!((9..=11).contains(&track.toe_offs.len()), "{}", track.toe_offs.len());
        assert!(track.alternates());
    }
}

#[test]
fn flat_signal_is_no_gait() {
    let t: Vec<f64> = (0..3000).map(|i| i as f64 / FS).collect();
    assert_eq!(detect_events(&vec![0.0; 3000], &t, SensorId::LeftFoot, &Default::default()), Err(Error::NoGait));
}

#[test]
fn symmetric_synthetic_walk_validates_every_stride() {
    let (rec, gt) = synthesize_recording(&nominal(), 10.0, FS, 2).unwrap();
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    assert!(a.bilateral.excluded.is_empty(), "{:?}", a.bilateral.excluded);
    let truth = pair_bilateral(&gt.left, &gt.right);
    assert_eq!(a.bilateral.strides.len(), truth.strides.len());
    assert_eq!(a.strides.len(), a.bilateral.strides.len());
    assert_eq!(a.bilateral.strides_of(SensorId::RightFoot).count(), 9);
}

#[test]
fn tracks_from_different_recordings_are_mostly_excluded() {
    let profiles = generate_profiles(2, 8).unwrap();
    let mut p0 = profiles.profiles[0].clone().with_noise(0.0);
    let mut p1 = profiles.profiles[1].clone().with_noise(0.0);
    p0.cadence_hz = 0.8;
    p1.cadence_hz = 1.25;
    let (r0, _) = synthesize_recording(&p0, 12.0, FS, 0).unwrap();
    let (r1, _) = synthesize_recording(&p1, 12.0, FS, 1).unwrap();
    let a0 = analyze_recording(&r0, &PipelineConfig::default()).unwrap();
    let a1 = analyze_recording(&r1, &PipelineConfig::default()).unwrap();
    let mixed = pair_bilateral(&a0.left, &a1.right);
    let total = mixed.strides.len() + mixed.excluded.len();
    assert!(total > 0);
    assert!(mixed.excluded.len() * 2 > total, "{} of {total} excluded", mixed.excluded.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn events_shift_with_the_time_base(c in -50.0f64..50.0, seed in 0u64..100) {
        let (x, t, _) = foot_gyro(&nominal().with_noise(0.1), 6.0, seed, SensorId::RightFoot);
        let cfg = EventDetectorConfig::default();
        let a = detect_events(&x, &t, SensorId::RightFoot, &cfg).unwrap();
        let shifted: Vec<f64> = t.iter().map(|v| v + c).collect();
        let b = detect_events(&x, &shifted, SensorId::RightFoot, &cfg).unwrap();
        prop_assert_eq!(a.heel_strikes.len(), b.heel_strikes.len());
        prop_assert_eq!(a.toe_offs.len(), b.toe_offs.len());
        for (p, q) in a.heel_strikes.iter().chain(&a.toe_offs).zip(b.heel_strikes.iter().chain(&b.toe_offs)) {
            prop_assert_eq!(p + c, *q);
        }
    }

    #[test]
    fn events_ignore_positive_amplitude_scale(k in 0.01f64..100.0, seed in 0u64..100) {
        let (x, t, _) = foot_gyro(&nominal().with_noise(0.1), 6.0, seed, SensorId::LeftFoot);
        let cfg = EventDetectorConfig::default();
        let a = detect_events(&x, &t, SensorId::LeftFoot, &cfg).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * k).collect();
        let b = detect_events(&scaled, &t, SensorId::LeftFoot, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
