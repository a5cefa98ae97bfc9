//! Dataset invariants and pipeline plumbing over generated data.

use std::sync::OnceLock;

use risblock::pipeline::{
    calibrate_rate_threshold, evaluate_models, load_models, run_on_dataset, train_models, write_models,
    ExperimentConfig, Scenario, EXPERIMENT_MANIFEST_FILE, MODELS_DIR,
};
use risblock::scene::{generate_dataset, generate_sample, Dataset, DatasetConfig, LinkStatus};
use risblock::Error;

fn small() -> &'static Dataset {
    static DS: OnceLock<Dataset> = OnceLock::new();
    DS.get_or_init(|| {
        generate_dataset(&DatasetConfig {
            n_samples: 600,
            seed: 21,
            ..Default::default()
        })
        .unwrap()
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n.max(1) as f64
}

#[test]
fn default_dataset_is_balanced() {
    let ds = generate_dataset(&DatasetConfig::default()).unwrap();
    assert_eq!(ds.samples.len(), 5000);
    for (f, name) in ds
        .class_counts()
        .frequencies()
        .iter()
        .zip(["absent", "unblocked", "blocked"])
    {
        assert!((0.2..=0.5).contains(f), "{name} frequency {f}");
    }
}

#[test]
fn features_agree_with_labels() {
    let ds = small();
    let of =
        |l: LinkStatus, f: fn(&risblock::scene::Sample) -> f64| mean(ds.samples.iter().filter(|s| s.label == l).map(f));
    assert!(of(LinkStatus::Blocked, |s| s.ris_rate) > of(LinkStatus::Absent, |s| s.ris_rate));
    assert!(of(LinkStatus::Unblocked, |s| s.direct_rate) > of(LinkStatus::Blocked, |s| s.direct_rate));
    for s in &ds.samples {
        assert_eq!(s.ue_position.is_none(), s.label == LinkStatus::Absent);
        if s.label == LinkStatus::Absent {
            assert_eq!((s.direct_rate, s.ris_rate), (0.0, 0.0));
        } else {
            assert!(s.ris_rate >= s.direct_rate - 1e-9, "RIS made sample {} worse", s.index);
        }
        assert_eq!(s.image.channel_max(2) > 0.0, s.label == LinkStatus::Unblocked);
    }
}

#[test]
fn samples_do_not_depend_on_generation_order() {
    let ds = small();
    let cfg = &ds.manifest.config;
    for i in [599, 0, 311, 42] {
        let s = generate_sample(cfg, i).unwrap();
        assert_eq!(s.label, ds.samples[i].label);
        assert_eq!(s.ris_rate.to_bits(), ds.samples[i].ris_rate.to_bits());
        assert_eq!(s.image, ds.samples[i].image);
    }
}

#[test]
fn write_load_and_tamper() {
    let ds = small();
    let dir = tempfile::tempdir().unwrap();
    ds.write(dir.path()).unwrap();
    let back = Dataset::load(dir.path()).unwrap();
    assert_eq!(back.manifest, ds.manifest);
    let path = dir.path().join("features.csv");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push('\n');
    std::fs::write(&path, text).unwrap();
    assert!(matches!(Dataset::load(dir.path()), Err(Error::HashMismatch { .. })));
}

#[test]
fn rate_threshold_separates_absent_from_blocked() {
    let ds = small();
    let pairs: Vec<_> = ds.samples.iter().map(|s| (s.ris_rate, s.label)).collect();
    let fit = calibrate_rate_threshold(&pairs).unwrap();
    assert!(fit.train_accuracy > 0.99, "{fit:?}");
}

#[test]
fn models_round_trip_and_refuse_other_datasets() {
    let ds = small();
    let cfg = ExperimentConfig::default();
    let a = train_models(ds, &cfg.train, &cfg.pipeline, &[Scenario::RisOnly, Scenario::Both]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_models(dir.path(), &a).unwrap();
    let loaded = load_models(dir.path(), &[Scenario::RisOnly, Scenario::Both]).unwrap();
    let r1 = evaluate_models(ds, &a, &cfg.pipeline).unwrap();
    let r2 = evaluate_models(ds, &loaded, &cfg.pipeline).unwrap();
    for (x, y) in r1.iter().zip(&r2) {
        assert_eq!(
            (x.scenario, x.accuracy, x.confusion),
            (y.scenario, y.accuracy, y.confusion)
        );
    }
    assert!(matches!(
        load_models(dir.path(), &[Scenario::None]),
        Err(Error::Missing(_))
    ));

    let other = generate_dataset(&DatasetConfig {
        n_samples: 600,
        seed: 22,
        ..Default::default()
    })
    .unwrap();
    assert!(matches!(
        evaluate_models(&other, &loaded, &cfg.pipeline),
        Err(Error::HashMismatch { .. })
    ));
}

#[test]
fn experiment_writes_every_artifact() {
    let ds = small();
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::default();
    let summary = run_on_dataset(&cfg, ds, dir.path()).unwrap();
    assert_eq!(summary.reports.len(), 4);
    for s in Scenario::ALL {
        for f in [
            format!("report_{s}.json"),
            format!("curve_{s}.csv"),
            format!("confusion_{s}.csv"),
        ] {
            assert!(dir.path().join(&f).is_file(), "{f}");
        }
        assert!(dir.path().join(MODELS_DIR).join(format!("model_{s}.bin")).is_file());
        let r = summary.reports.iter().find(|r| r.scenario == s).unwrap();
        let total: usize = r.confusion.iter().flatten().sum();
        assert_eq!(total, r.n_test);
        assert!(!r.curve.is_empty());
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join(EXPERIMENT_MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest["dataset_sha256"], ds.manifest.content_sha256.as_str());
    assert_eq!(
        summary.accuracy(Scenario::Both),
        Some(summary.manifest.accuracy["both"])
    );
}
