use gaitid_core::events::pair_bilateral;
use gaitid_core::pipeline::{analyze_recording, PipelineConfig};
use gaitid_core::segmentation::Interval;
use gaitid_core::synth::{cadence_gap, duration_for_strides, generate_profiles, synthesize_recording};
use gaitid_core::SensorId;
use proptest::prelude::*;

#[test]
fn twenty_profiles_reproduce_exactly() {
    let a = generate_profiles(20, 7).unwrap();
    let b = generate_profiles(20, 7).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    assert_eq!(a.profiles.len(), 20);
    assert_ne!(a, generate_profiles(20, 8).unwrap());
}

#[test]
fn two_profiles_keep_cadences_apart() {
    for seed in 0..20 {
        let p = generate_profiles(2, seed).unwrap();
        assert!((p.profiles[0].cadence_hz - p.profiles[1].cadence_hz).abs() >= 0.05);
    }
    assert_eq!(cadence_gap(2), 0.05);
}

#[test]
fn sixty_profiles_fit_the_oversampling_budget() {
    for seed in 0..5 {
        let p = generate_profiles(60, seed).unwrap();
        assert_eq!(p.profiles.len(), 60);
        assert!(p.attempts <= 600, "{} attempts", p.attempts);
        let mut ids: Vec<_> = p.profiles.iter().map(|q| q.subject_id.clone()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 60);
    }
}

#[test]
fn recordings_reproduce_byte_for_byte() {
    let p = generate_profiles(3, 1).unwrap().profiles.remove(2);
    let (r1, g1) = synthesize_recording(&p, 8.0, 1000.0, 5).unwrap();
    let (r2, g2) = synthesize_recording(&p, 8.0, 1000.0, 5).unwrap();
    for id in SensorId::ALL {
        let bits = |r: &gaitid_core::Recording| {
            r.stream(id).iter().flat_map(|s| [s.t, s.acc[0], s.acc[1], s.acc[2], s.gyro[0], s.gyro[1], s.gyro[2]]).map(f64::to_bits).collect::<Vec<_>>()
        };
        assert_eq!(bits(&r1), bits(&r2));
    }
    assert_eq!(g1, g2);
    let (r3, _) = synthesize_recording(&p, 8.0, 1000.0, 6).unwrap();
    assert_ne!(r1, r3);
}

#[test]
fn nominal_stance_fraction_is_exact() {
    let mut p = generate_profiles(2, 2).unwrap().profiles.remove(0);
    p.noise_sigma = 0.0;
    p.left_right_asymmetry = 0.0;
    let (_, gt) = synthesize_recording(&p, 10.0, 1000.0, 0).unwrap();
    for s in &gt.strides {
        assert!((s.stance_fraction() - p.stance_fraction).abs() < 1e-12);
        assert!((s.duration(Interval::Dls1) / s.duration(Interval::Stride) - p.dls_fraction).abs() < 1e-12);
    }
}

#[test]
fn too_short_duration_is_rejected() {
    let p = generate_profiles(2, 2).unwrap().profiles.remove(0);
    assert!(synthesize_recording(&p, 1.0, 1000.0, 0).is_err());
}

#[test]
fn noisy_walks_recover_at_least_99_percent_of_events_within_10_ms() {
    let (mut hits, mut total) = (0usize, 0usize);
    for seed in 0..20u64 {
        let p = generate_profiles(2, 100 + seed).unwrap().profiles.remove(0).with_noise(0.1);
        let (rec, gt) = synthesize_recording(&p, 10.0, 1000.0, seed).unwrap();
        let a = analyze_recording(&rec, &PipelineConfig::default()).unwrap();
        for (found, truth) in [(&a.left, &gt.left), (&a.right, &gt.right)] {
            for (f, t) in [(&found.heel_strikes, &truth.heel_strikes), (&found.toe_offs, &truth.toe_offs)] {
                for v in t.iter() {
                    total += 1;
                    hits += usize::from(f.iter().any(|x| (x - v).abs() <= 0.010));
                }
            }
        }
    }
    assert!(hits as f64 >= 0.99 * total as f64, "{hits} of {total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ground_truth_is_ordered_and_additive(seed in any::<u64>(), strides in 3usize..12, rate in prop::sample::select(vec![100.0, 250.0, 1000.0])) {
        let profiles = generate_profiles(4, seed).unwrap();
        for (i, p) in profiles.profiles.iter().enumerate() {
            let (rec, gt) = synthesize_recording(p, duration_for_strides(p, strides), rate, seed ^ i as u64).unwrap();
            prop_assert!(rec.violations().is_empty());
            prop_assert!(gt.left.alternates() && gt.right.alternates());
            let paired = pair_bilateral(&gt.left, &gt.right);
            prop_assert!(paired.excluded.is_empty());
            prop_assert_eq!(paired.strides.len(), gt.strides.len());
            for s in &gt.strides {
                prop_assert!(s.boundaries.windows(2).all(|w| w[0] < w[1]));
                let [a, b, c, d] = s.phase_durations();
                prop_assert_eq!(s.duration(Interval::Stride), a + b + c + d);
            }
            for foot in [SensorId::RightFoot, SensorId::LeftFoot] {
                prop_assert!(gt.strides.iter().filter(|s| s.reference_foot == foot).count() >= strides);
            }
        }
    }
}
