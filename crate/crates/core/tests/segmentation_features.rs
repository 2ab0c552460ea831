use gaitid_core::features::{
    build_features, descriptive_stats, find_contralateral, minmax_scale_features, temporal_params, SensorConfig,
};
use gaitid_core::gait_data::ImuSample;
use gaitid_core::pipeline::{analyze_recording, PipelineConfig};
use gaitid_core::segmentation::{extract_phase_window, Interval, StrideSegmentation};
use gaitid_core::synth::{generate_profiles, synthesize_recording, SubjectProfile};
use gaitid_core::{Matrix, Recording, SensorId};
use proptest::prelude::*;

const FS: f64 = 1000.0;

fn symmetric() -> SubjectProfile {
    let mut p = generate_profiles(2, 5).unwrap().profiles.remove(1);
    p.cadence_hz = 1.0;
    p.dls_fraction = 0.1;
    p.stance_fraction = 0.6;
    p.left_right_asymmetry = 0.0;
    p.noise_sigma = 0.0;
    p
}

fn shifted(r: &Recording, c: f64) -> Recording {
    let streams = SensorId::ALL.map(|id| r.stream(id).iter().map(|s| ImuSample { t: s.t + c, ..*s }).collect::<Vec<_>>());
    Recording::new(r.subject_id(), r.sample_rate_hz(), streams).unwrap()
}

#[test]
fn ten_second_walk_gives_nine_reference_strides() {
    let (_, gt) = synthesize_recording(&symmetric(), 10.0, FS, 1).unwrap();
    assert_eq!(gt.strides.iter().filter(|s| s.reference_foot == SensorId::RightFoot).count(), 9);
    for s in &gt.strides {
        assert!((s.stance_fraction() - 0.6).abs() < 1e-9);
    }
}

#[test]
fn detected_durations_add_up_exactly() {
    let profiles = generate_profiles(4, 9).unwrap();
    for (i, p) in profiles.profiles.iter().enumerate() {
        let (rec, _) = synthesize_recording(p, 12.0, FS, i as u64).unwrap();
        let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
        assert!(!a.strides.is_empty());
        for s in &a.strides {
            let [d1, sls, d2, sw] = s.phase_durations();
            assert!([d1, sls, d2, sw].iter().all(|&d| d > 0.0));
            assert_eq!(s.duration(Interval::Step), d1 + sls);
            assert_eq!(s.duration(Interval::Stance), d1 + sls + d2);
            assert_eq!(s.duration(Interval::Stride), d1 + sls + d2 + sw);
            for w in Interval::PHASES.windows(2) {
                assert_eq!(s.bounds(w[0]).1, s.bounds(w[1]).0);
            }
            let f = s.stance_fraction();
            assert!((0.45..=0.75).contains(&f));
        }
    }
}

#[test]
fn both_reference_feet_share_one_event_set() {
    let (rec, _) = synthesize_recording(&symmetric().with_noise(0.1), 12.0, FS, 3).unwrap();
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    let events = |foot: SensorId| {
        let mut v: Vec<u64> = a
            .strides
            .iter()
            .filter(|s| s.reference_foot == foot)
            .flat_map(|s| s.boundaries)
            .map(f64::to_bits)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (r, l) = (events(SensorId::RightFoot), events(SensorId::LeftFoot));
    // Each foot's strides cover the other's events, apart from the partial
    // strides at either end of the walk.
    let shared = r.iter().filter(|e| l.contains(e)).count();
    assert!(shared + 6 >= r.len().max(l.len()), "{shared} of {} / {}", r.len(), l.len());
    // Right- and left-referenced strides interleave in time.
    let starts = |foot: SensorId| a.strides.iter().filter(|s| s.reference_foot == foot).map(|s| s.boundaries[0]).collect::<Vec<_>>();
    for (x, y) in starts(SensorId::RightFoot).iter().zip(starts(SensorId::LeftFoot).iter().skip(1)) {
        assert!(x < y);
    }
}

#[test]
fn window_shapes() {
    let (rec, _) = synthesize_recording(&symmetric(), 6.0, FS, 0).unwrap();
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    let seg = StrideSegmentation {
        reference_foot: SensorId::RightFoot,
        stride_index: 0,
        boundaries: [2.0, 2.1, 2.5, 2.6, 3.0],
    };
    let w = extract_phase_window(&a.pre, &seg, Interval::Stride, SensorId::Pelvis).unwrap();
    assert_eq!(w.channels.len(), 6);
    assert!(w.channels.iter().all(|c| c.1.len() == 1000));
    let w = extract_phase_window(&a.pre, &seg, Interval::Swing, SensorId::LeftFoot).unwrap();
    assert_eq!(w.channels.len(), 4);
    assert!(w.channels.iter().all(|c| c.1.len() == 400));
    let late = StrideSegmentation { boundaries: [5.5, 5.6, 6.0, 6.1, 6.5], ..seg };
    assert!(extract_phase_window(&a.pre, &late, Interval::Stride, SensorId::Pelvis).is_err());
}

#[test]
fn feature_dimensions_per_config() {
    let (rec, _) = synthesize_recording(&symmetric().with_noise(0.1), 10.0, FS, 4).unwrap();
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    for (config, dim) in [(SensorConfig::Pelvis, 32), (SensorConfig::Foot, 24), (SensorConfig::FootPlusPelvis, 48)] {
        assert_eq!(config.dimension(), dim);
        for interval in Interval::ALL {
            let b = build_features(&a.pre, &a.strides, interval, config).unwrap();
            assert!(!b.vectors.is_empty());
            for v in &b.vectors {
                assert_eq!(v.values.len(), dim);
                assert!(v.values.iter().all(|x| x.is_finite()));
                assert!(v.temporal().iter().all(|&x| x > 0.0));
            }
        }
    }
}

#[test]
fn last_stride_without_contralateral_partner_is_skipped() {
    let (rec, _) = synthesize_recording(&symmetric(), 10.0, FS, 4).unwrap();
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    let b = build_features(&a.pre, &a.strides, Interval::Stride, SensorConfig::Pelvis).unwrap();
    assert!(b.skipped_no_contra >= 1);
    assert_eq!(b.vectors.len() + b.skipped_no_contra, a.strides.len());
}

#[test]
fn symmetric_walk_gives_matching_reference_and_contralateral_timing() {
    let (rec, gt) = synthesize_recording(&symmetric(), 10.0, FS, 6).unwrap();
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    // Exact events from the generator: the tuples agree within 1 ms.
    let exact = build_features(&a.pre, &gt.strides, Interval::Stride, SensorConfig::Foot).unwrap();
    assert!(exact.vectors.len() >= 16);
    for v in &exact.vectors {
        let t = v.temporal();
        for k in 0..4 {
            assert!((t[k] - t[k + 4]).abs() <= 0.001, "{t:?}");
        }
    }
    // Detected events sit on the 1 ms sample grid, so each duration can move
    // by one sample at either end.
    let detected = build_features(&a.pre, &a.strides, Interval::Stride, SensorConfig::Foot).unwrap();
    assert!(detected.vectors.len() >= 14);
    for v in &detected.vectors {
        let t = v.temporal();
        for k in 0..4 {
            assert!((t[k] - t[k + 4]).abs() <= 0.002 + 1e-9, "{t:?}");
        }
    }
}

#[test]
fn temporal_parameters_of_worked_example() {
    let r = StrideSegmentation { reference_foot: SensorId::RightFoot, stride_index: 0, boundaries: [0.0, 0.1, 0.5, 0.6, 1.0] };
    let l = StrideSegmentation { reference_foot: SensorId::LeftFoot, stride_index: 0, boundaries: [0.5, 0.6, 1.0, 1.1, 1.5] };
    let got = temporal_params(&r, &l);
    let want = [0.1, 0.4, 0.1, 0.4, 0.1, 0.4, 0.1, 0.4];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12);
    }
    assert_eq!(find_contralateral(&r, &[l]), Some(&l));
}

#[test]
fn stats_and_scaler_examples() {
    let s = descriptive_stats(&[-1.0, 1.0]).unwrap();
    assert_eq!((s.min, s.max, s.mean, s.std), (-1.0, 1.0, 0.0, 1.0));
    let train = Matrix::from_rows(&[[0.0, 2.0], [10.0, 2.0]]).unwrap();
    let test = Matrix::from_rows(&[[5.0, 2.0], [20.0, 7.0]]).unwrap();
    let (tr, te, _) = minmax_scale_features(&train, &[&test]).unwrap();
    assert_eq!(tr.row(1), &[1.0, 0.0]);
    assert_eq!(te[0].row(0), &[0.5, 0.0]);
    assert_eq!(te[0].row(1), &[2.0, 0.0]);
}

#[test]
fn stride_statistics_bound_every_sub_interval() {
    let (rec, _) = synthesize_recording(&symmetric().with_noise(0.1), 10.0, FS, 8).unwrap();
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    for seg in &a.strides {
        for sensor in [SensorId::Pelvis, seg.reference_foot] {
            let whole = extract_phase_window(&a.pre, seg, Interval::Stride, sensor).unwrap();
            for interval in Interval::ALL {
                let part = extract_phase_window(&a.pre, seg, interval, sensor).unwrap();
                for ((_, w), (_, p)) in whole.channels.iter().zip(&part.channels) {
                    let (sw, sp) = (descriptive_stats(w).unwrap(), descriptive_stats(p).unwrap());
                    assert!(sw.min <= sp.min && sw.max >= sp.max);
                }
            }
        }
    }
}

#[test]
fn time_shifted_recording_gives_the_same_features() {
    let (rec, _) = synthesize_recording(&symmetric().with_noise(0.1), 8.0, FS, 2).unwrap();
    let moved = shifted(&rec, 137.25);
    let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
    let b = analyze_recording(&moved, &PipelineConfig::default()).unwrap();
    for config in SensorConfig::ALL {
        for interval in Interval::ALL {
            let fa = build_features(&a.pre, &a.strides, interval, config).unwrap();
            let fb = build_features(&b.pre, &b.strides, interval, config).unwrap();
            assert_eq!(fa.vectors.len(), fb.vectors.len());
            for (x, y) in fa.vectors.iter().zip(&fb.vectors) {
                for (p, q) in x.values.iter().zip(&y.values) {
                    assert!((p - q).abs() <= 1e-9 * (1.0 + p.abs()), "{config} {interval}: {p} vs {q}");
                }
            }
        }
    }
}

fn boundaries() -> impl Strategy<Value = [f64; 5]> {
    (0.0f64..100.0, prop::array::uniform4(0.001f64..2.0)).prop_map(|(start, d)| {
        let mut b = [start; 5];
        for k in 0..4 {
            b[k + 1] = b[k] + d[k];
        }
        b
    })
}

proptest! {
    #[test]
    fn composite_durations_are_exact_sums(b in boundaries()) {
        let s = StrideSegmentation { reference_foot: SensorId::LeftFoot, stride_index: 0, boundaries: b };
        let [d1, sls, d2, sw] = s.phase_durations();
        prop_assert_eq!(s.duration(Interval::Step), d1 + sls);
        prop_assert_eq!(s.duration(Interval::Stance), s.duration(Interval::Step) + d2);
        prop_assert_eq!(s.duration(Interval::Stride), s.duration(Interval::Stance) + sw);
        prop_assert_eq!(s.duration(Interval::Stride), d1 + sls + d2 + sw);
    }

    #[test]
    fn stats_ignore_window_order(mut w in prop::collection::vec(-1e3f64..1e3, 1..300), seed in any::<u64>()) {
        let a = descriptive_stats(&w).unwrap();
        let mut rng = gaitid_core::rng::seeded(seed);
        rand::seq::SliceRandom::shuffle(w.as_mut_slice(), &mut rng);
        let b = descriptive_stats(&w).unwrap();
        prop_assert_eq!((a.min, a.max), (b.min, b.max));
        prop_assert!((a.mean - b.mean).abs() <= 1e-9 * (1.0 + a.mean.abs()));
        prop_assert!((a.std - b.std).abs() <= 1e-9 * (1.0 + a.std));
    }
}
