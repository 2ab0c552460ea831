use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gaitid::formats::{load_data, DataSource};
use gaitid::model::load_model;
use gaitid::tables;
use gaitid_core::evaluation::{EvaluationReport, GridCell, ReportMetadata};
use gaitid_core::features::SensorConfig;
use gaitid_core::pipeline::{analyze_dataset, DropCounts, PipelineConfig};
use gaitid_core::segmentation::Interval;
use gaitid_core::classifiers::ClassifierKind;
use serde_json::json;

fn gaitid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitid")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = gaitid(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Data rows of a CSV artifact: provenance comment and header removed.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# provenance: "));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

#[test]
fn unreadable_input_exits_1_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = gaitid(&["evaluate", "--manifest", "/nonexistent/manifest.csv", "--seed", "1", "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "io");
    assert!(!out_dir.exists());
}

#[test]
fn invalid_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaitid(&["synth", "--subjects", "3", "--noise", "0.5", "--seed", "1", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = gaitid(&["synth", "--subjects", "1", "--seed", "1", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn stage_by_stage_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["synth", "--subjects", "4", "--strides", "6", "--seed", "5", "--out", p(&data)]);
    for f in ["manifest.csv", "ground_truth.csv", "profiles.json", "S01.csv", "S04.csv"] {
        assert!(data.join(f).exists(), "{f}");
    }

    let ev = dir.path().join("events");
    ok(&["events", "--manifest", p(&data), "--out", p(&ev)]);
    let (header, body) = rows(&ev.join("S02.events.csv"));
    assert_eq!(header, ["foot", "event_type", "time_s"]);
    assert!(body.len() >= 4 * 7);

    let seg = dir.path().join("seg");
    ok(&["segment", "--manifest", p(&data), "--out", p(&seg)]);
    let (header, body) = rows(&seg.join("segments.csv"));
    assert_eq!(header.len(), 7);
    for r in &body {
        let d: Vec<f64> = r[3..].iter().map(|v| v.parse().unwrap()).collect();
        assert!(d.iter().all(|&x| x > 0.0));
    }

    let feat = dir.path().join("feat");
    ok(&["features", "--manifest", p(&data), "--config", "PELVIS", "--interval", "SWING", "--out", p(&feat)]);
    let (header, body) = rows(&feat.join("features.csv"));
    assert_eq!(header.len(), 5 + 32);
    assert!(body.iter().all(|r| r.len() == 5 + 32 && r[3] == "SWING" && r[4] == "PELVIS"));

    let model_path = dir.path().join("models/knn.json");
    ok(&["train", "--manifest", p(&data), "--model", "knn", "--seed", "1", "--out", p(&model_path)]);
    let model = load_model(&model_path).unwrap();
    let loaded = load_data(&DataSource::Manifest(data.clone()), None).unwrap();
    let an = analyze_dataset(&loaded.dataset, &PipelineConfig::default());
    let x = an.feature_matrix(SensorConfig::FootPlusPelvis, Interval::Stride).unwrap();
    let predicted = model.predict_subjects(&x).unwrap();
    let truth: Vec<&str> = an.labels().iter().map(|&l| an.subjects[l].as_str()).collect();
    assert!(predicted.iter().zip(&truth).all(|(a, b)| a == b));
}

#[test]
fn twenty_subject_evaluation_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let eval = dir.path().join("eval");
    let plots = dir.path().join("plots");
    ok(&["synth", "--subjects", "20", "--strides", "5", "--seed", "11", "--out", p(&data)]);
    ok(&[
        "evaluate", "--manifest", p(&data), "--seed", "3", "--ann-hidden", "32,32", "--ann-epochs", "60", "--out", p(&eval),
    ]);
    let (header, body) = rows(&eval.join("accuracy_grid.csv"));
    assert_eq!(header, ["config", "interval", "KNN", "SVM", "DT", "RF", "NB", "ANN", "best"]);
    assert_eq!(body.len(), 3 * 7);
    for r in &body {
        for v in &r[2..8] {
            let a: f64 = v.parse().unwrap();
            assert!((0.0..=1.0).contains(&a));
            assert_eq!(v.split('.').nth(1).map(str::len), Some(3), "{v}");
        }
        assert!(!r[8].is_empty());
    }
    assert_eq!(fs::read_dir(eval.join("confusion")).unwrap().count(), 3 * 7 * 6);

    ok(&["report", "--report", p(&eval), "--out", p(&plots)]);
    let (h, b) = rows(&plots.join("phase_comparison.csv"));
    assert_eq!(h, ["config", "classifier", "DLS1", "SLS", "DLS2", "SWING"]);
    assert_eq!(b.len(), 3 * 6);
    let (h, _) = rows(&plots.join("cumulative_phase.csv"));
    assert_eq!(h, ["config", "classifier", "DLS1", "STEP", "STANCE", "STRIDE"]);
    let (h, b) = rows(&plots.join("sensor_comparison.csv"));
    assert_eq!(h, ["interval", "classifier", "FOOT", "PELVIS", "FOOT_PLUS_PELVIS"]);
    assert_eq!(b.len(), 7 * 6);
    let (h, b) = rows(&plots.join("confusion_matrix.csv"));
    assert_eq!(h.len(), 22);
    assert_eq!(b.len(), 20);
    for r in &b {
        let sum: f64 = r[1..21].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn absent_cells_render_as_empty_fields() {
    let metadata = ReportMetadata {
        seed: 0,
        folds: 5,
        fold_assignments: vec![],
        fold_warnings: vec![],
        scaler_policy: String::new(),
        svm_multiclass: String::new(),
        stride_pooling: String::new(),
        subjects: vec!["a".into(), "b".into()],
        samples_per_subject: vec![0, 0],
        n_samples: 0,
        drops: DropCounts::default(),
        recording_failures: vec![],
        classifiers: vec![ClassifierKind::Knn.default_spec(), ClassifierKind::Dt.default_spec()],
    };
    let cell = |classifier, result: Option<f64>| GridCell {
        config: SensorConfig::Pelvis,
        interval: Interval::Dls1,
        classifier,
        result: result.map(|a| gaitid_core::evaluation::CvResult {
            fold_accuracies: vec![a],
            mean_accuracy: a,
            confusion: gaitid_core::evaluation::Confusion::from_counts(vec![vec![1, 0], vec![0, 1]]),
        }),
        absent_reason: result.is_none().then(|| "failed".to_string()),
        best_in_row: result.is_some(),
    };
    let report = EvaluationReport {
        metadata,
        cells: vec![cell(ClassifierKind::Knn, Some(0.95)), cell(ClassifierKind::Dt, None)],
    };
    let text = String::from_utf8(tables::grid_csv("g.csv", &report, &json!({})).bytes).unwrap();
    assert_eq!(text.lines().nth(2).unwrap(), "PELVIS,DLS1,0.950,,KNN");
    let text = String::from_utf8(tables::phase_comparison_csv("p.csv", &report, &json!({})).bytes).unwrap();
    assert!(text.lines().any(|l| l == "PELVIS,DT,,,,"), "{text}");
    let text = String::from_utf8(tables::confusion_csv("c.csv", &report.metadata.subjects, None, &json!({})).bytes).unwrap();
    assert_eq!(text.lines().nth(2).unwrap(), "a,,,");
}
