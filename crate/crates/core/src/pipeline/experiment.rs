//! Orchestration: split, calibrate, train the four scenario models,
//! evaluate, and write artifacts.
//!
//! A models directory holds `model_<scenario>.bin`, `history_<scenario>.csv`,
//! `split.json` (train/test indices and the dataset hash they refer to) and
//! `cascade.json` (detector rule and calibrated rate threshold). A metrics
//! directory holds `report_<scenario>.json`, `curve_<scenario>.csv`,
//! `confusion_<scenario>.csv`, `experiment_manifest.json` and `timing.json`
//! (wall times, the only output that differs between identical runs).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cascade::{calibrate_rate_threshold, Cascade, ThresholdFit, VisibilityDetector};
use super::config::ExperimentConfig;
use super::evaluate::{evaluate_scenario, EvalReport};
use super::model::{train_scenario, PipelineConfig, ScenarioModel};
use super::scenario::Scenario;
use super::split::split_indices;
use crate::error::{Error, Result};
use crate::learn::{history_csv, parse_history_csv, TrainConfig, TrainedModel};
use crate::scene::{generate_dataset, ClassCounts, Dataset, LinkStatus, Sample};

pub const MODELS_DIR: &str = "models";
pub const SPLIT_FILE: &str = "split.json";
pub const CASCADE_FILE: &str = "cascade.json";
pub const EXPERIMENT_MANIFEST_FILE: &str = "experiment_manifest.json";
pub const TIMING_FILE: &str = "timing.json";

pub fn model_file(s: Scenario) -> String {
    format!("model_{}.bin", s.name())
}

pub fn history_file(s: Scenario) -> String {
    format!("history_{}.csv", s.name())
}

pub fn report_file(s: Scenario) -> String {
    format!("report_{}.json", s.name())
}

pub fn curve_file(s: Scenario) -> String {
    format!("curve_{}.csv", s.name())
}

pub fn confusion_file(s: Scenario) -> String {
    format!("confusion_{}.csv", s.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub seed: u64,
    pub train_fraction: f64,
    pub dataset_sha256: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRecord {
    pub cascade: Cascade,
    pub fit: ThresholdFit,
}

/// Everything produced by training, ready to evaluate or write out.
#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub split: SplitRecord,
    pub cascade: CascadeRecord,
    pub models: Vec<ScenarioModel>,
    /// Training wall time per model, same order as `models`; zero when loaded.
    pub train_time_s: Vec<f64>,
}

impl TrainArtifacts {
    pub fn model(&self, s: Scenario) -> Option<&ScenarioModel> {
        self.models.iter().find(|m| m.scenario == s)
    }
}

fn subset<'a>(dataset: &'a Dataset, idx: &[usize]) -> Vec<&'a Sample> {
    idx.iter().map(|&i| &dataset.samples[i]).collect()
}

/// Splits the dataset, calibrates the cascade threshold on the training
/// side, and trains one model per requested scenario (concurrently; each
/// training run is single-threaded and seeded).
pub fn train_models(
    dataset: &Dataset,
    tcfg: &TrainConfig,
    pcfg: &PipelineConfig,
    scenarios: &[Scenario],
) -> Result<TrainArtifacts> {
    tcfg.validate()?;
    pcfg.validate()?;
    let (train_idx, test_idx) = split_indices(dataset.samples.len(), tcfg.train_fraction, tcfg.seed)?;
    let train_set = subset(dataset, &train_idx);
    let rates: Vec<(f64, LinkStatus)> = train_set.iter().map(|s| (s.ris_rate, s.label)).collect();
    let fit = calibrate_rate_threshold(&rates)?;
    let cascade = Cascade {
        detector: VisibilityDetector {
            threshold: pcfg.detector_threshold,
        },
        rate_threshold: fit.threshold,
    };
    let trained = scenarios
        .par_iter()
        .map(|&s| {
            let start = Instant::now();
            train_scenario(&train_set, s, tcfg, pcfg).map(|m| (m, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (models, train_time_s) = trained.into_iter().unzip();
    Ok(TrainArtifacts {
        split: SplitRecord {
            seed: tcfg.seed,
            train_fraction: tcfg.train_fraction,
            dataset_sha256: dataset.manifest.content_sha256.clone(),
            train: train_idx,
            test: test_idx,
        },
        cascade: CascadeRecord { cascade, fit },
        models,
        train_time_s,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(path, s.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::Missing(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_models(dir: &Path, a: &TrainArtifacts) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for m in &a.models {
        m.model.save(&dir.join(model_file(m.scenario)))?;
        write_file(&dir.join(history_file(m.scenario)), history_csv(&m.history).as_bytes())?;
    }
    write_json(&dir.join(SPLIT_FILE), &a.split)?;
    write_json(&dir.join(CASCADE_FILE), &a.cascade)
}

/// Loads the split, cascade and whichever of `scenarios` have model files.
pub fn load_models(dir: &Path, scenarios: &[Scenario]) -> Result<TrainArtifacts> {
    if !dir.is_dir() {
        return Err(Error::Missing(dir.to_path_buf()));
    }
    let split: SplitRecord = read_json(&dir.join(SPLIT_FILE))?;
    let cascade: CascadeRecord = read_json(&dir.join(CASCADE_FILE))?;
    let mut models = Vec::new();
    for &s in scenarios {
        let path = dir.join(model_file(s));
        let model = TrainedModel::<f64>::load(&path)?;
        if model.tag != s.tag() {
            return Err(Error::Format {
                path,
                reason: format!("model tag {} does not belong to scenario {s}", model.tag),
            });
        }
        let hpath = dir.join(history_file(s));
        if !hpath.exists() {
            return Err(Error::Missing(hpath));
        }
        let text = std::fs::read_to_string(&hpath).map_err(|e| Error::io(&hpath, e))?;
        models.push(ScenarioModel {
            scenario: s,
            model,
            history: parse_history_csv(&text, &hpath)?,
        });
    }
    let n = models.len();
    Ok(TrainArtifacts {
        split,
        cascade,
        models,
        train_time_s: vec![0.0; n],
    })
}

/// Evaluates every loaded model on the recorded test split. Refuses a
/// dataset other than the one the split was drawn from.
pub fn evaluate_models(dataset: &Dataset, a: &TrainArtifacts, pcfg: &PipelineConfig) -> Result<Vec<EvalReport>> {
    if a.split.dataset_sha256 != dataset.manifest.content_sha256 {
        return Err(Error::HashMismatch {
            path: SPLIT_FILE.into(),
            expected: a.split.dataset_sha256.clone(),
            actual: dataset.manifest.content_sha256.clone(),
        });
    }
    if let Some(&bad) = a.split.test.iter().find(|&&i| i >= dataset.samples.len()) {
        return Err(Error::InvalidParameter(format!("test index {bad} is out of range")));
    }
    let test = subset(dataset, &a.split.test);
    a.models
        .iter()
        .zip(&a.train_time_s)
        .map(|(m, t)| {
            let mut r = evaluate_scenario(&test, m.scenario, m, &a.cascade.cascade, pcfg.pooled_size)?;
            r.wall_time_s += t;
            Ok(r)
        })
        .collect()
}

pub fn write_reports(dir: &Path, reports: &[EvalReport]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for r in reports {
        write_json(&dir.join(report_file(r.scenario)), r)?;
        write_file(&dir.join(curve_file(r.scenario)), r.curve_csv().as_bytes())?;
        write_file(&dir.join(confusion_file(r.scenario)), r.confusion_csv().as_bytes())?;
    }
    let timing: BTreeMap<&str, f64> = reports.iter().map(|r| (r.scenario.name(), r.wall_time_s)).collect();
    write_json(&dir.join(TIMING_FILE), &timing)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub generator: String,
    pub dataset_seed: u64,
    pub train_seed: u64,
    pub dataset_sha256: String,
    pub n_samples: usize,
    pub class_counts: ClassCounts,
    pub n_train: usize,
    pub n_test: usize,
    pub rate_threshold: f64,
    pub threshold_train_accuracy: f64,
    pub model_sha256: BTreeMap<String, String>,
    pub accuracy: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub manifest: ExperimentManifest,
    pub reports: Vec<EvalReport>,
}

impl ExperimentSummary {
    pub fn accuracy(&self, s: Scenario) -> Option<f64> {
        self.reports.iter().find(|r| r.scenario == s).map(|r| r.accuracy)
    }
}

/// Full run: obtain the dataset (load from `dataset_dir` with hash check,
/// or generate), train all four scenario models, evaluate, and write models
/// under `out/models` and metrics under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentSummary> {
    let cfg = cfg.resolved();
    cfg.validate()?;
    let dataset = match &cfg.dataset_dir {
        Some(dir) => Dataset::load(dir)?,
        None => generate_dataset(&cfg.dataset)?,
    };
    run_on_dataset(&cfg, &dataset, out)
}

pub fn run_experiment_file(config_path: &Path, out: &Path) -> Result<ExperimentSummary> {
    run_experiment(&ExperimentConfig::load(config_path)?, out)
}

/// [`run_experiment`] on an already loaded dataset.
pub fn run_on_dataset(cfg: &ExperimentConfig, dataset: &Dataset, out: &Path) -> Result<ExperimentSummary> {
    let artifacts = train_models(dataset, &cfg.train, &cfg.pipeline, &Scenario::ALL)?;
    write_models(&out.join(MODELS_DIR), &artifacts)?;
    let reports = evaluate_models(dataset, &artifacts, &cfg.pipeline)?;
    write_reports(out, &reports)?;
    let manifest = ExperimentManifest {
        generator: format!("risblock {}", env!("CARGO_PKG_VERSION")),
        dataset_seed: dataset.manifest.config.seed,
        train_seed: cfg.train.seed,
        dataset_sha256: dataset.manifest.content_sha256.clone(),
        n_samples: dataset.samples.len(),
        class_counts: dataset.class_counts(),
        n_train: artifacts.split.train.len(),
        n_test: artifacts.split.test.len(),
        rate_threshold: artifacts.cascade.fit.threshold,
        threshold_train_accuracy: artifacts.cascade.fit.train_accuracy,
        model_sha256: artifacts
            .models
            .iter()
            .map(|m| (m.scenario.name().to_string(), sha256_hex(&m.model.to_bytes())))
            .collect(),
        accuracy: reports
            .iter()
            .map(|r| (r.scenario.name().to_string(), r.accuracy))
            .collect(),
        config: cfg.clone(),
    };
    write_json(&out.join(EXPERIMENT_MANIFEST_FILE), &manifest)?;
    Ok(ExperimentSummary { manifest, reports })
}
