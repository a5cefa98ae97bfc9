use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::model::PipelineConfig;
use crate::error::{Error, Result};
use crate::learn::TrainConfig;
use crate::scene::DatasetConfig;

/// Everything an experiment needs, read from one TOML file:
///
/// ```toml
/// seed = 3                 # optional; overrides dataset.seed and train.seed
/// dataset_dir = "data"     # optional; load instead of generating
///
/// [dataset]
/// n_samples = 2000
/// [dataset.scene]
/// blocker_count_max = 24
///
/// [train]
/// epochs = 10
///
/// [pipeline]
/// pooled_size = 16
/// ```
///
/// Every key is optional; unknown keys are rejected. Keys missing from
/// `[train]` fall back to [`experiment_train_config`], not to
/// `TrainConfig::default()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_dir: Option<PathBuf>,
    pub dataset: DatasetConfig,
    #[serde(deserialize_with = "train_section")]
    pub train: TrainConfig,
    pub pipeline: PipelineConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            dataset_dir: None,
            dataset: DatasetConfig::default(),
            train: experiment_train_config(),
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Training defaults for scenario experiments: the stock schedule with a
/// base learning rate of 0.5, since the networks here start from scratch.
pub fn experiment_train_config() -> TrainConfig {
    TrainConfig {
        learning_rate: 0.5,
        ..TrainConfig::default()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    weight_decay: Option<f64>,
    schedule_epochs: Option<Vec<usize>>,
    lr_reduction_factor: Option<f64>,
    epochs: Option<usize>,
    train_fraction: Option<f64>,
    hidden: Option<usize>,
    seed: Option<u64>,
}

fn train_section<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<TrainConfig, D::Error> {
    let s = TrainSection::deserialize(d)?;
    let b = experiment_train_config();
    Ok(TrainConfig {
        batch_size: s.batch_size.unwrap_or(b.batch_size),
        learning_rate: s.learning_rate.unwrap_or(b.learning_rate),
        weight_decay: s.weight_decay.unwrap_or(b.weight_decay),
        schedule_epochs: s.schedule_epochs.unwrap_or(b.schedule_epochs),
        lr_reduction_factor: s.lr_reduction_factor.unwrap_or(b.lr_reduction_factor),
        epochs: s.epochs.unwrap_or(b.epochs),
        train_fraction: s.train_fraction.unwrap_or(b.train_fraction),
        hidden: s.hidden.unwrap_or(b.hidden),
        seed: s.seed.unwrap_or(b.seed),
    })
}

impl ExperimentConfig {
    /// Parses TOML, reporting the offending line on failure.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let start = e.span().map_or(0, |s| s.start).min(text.len());
            let line = text[..start].matches('\n').count() + 1;
            Error::Config {
                line,
                text: text.lines().nth(line - 1).unwrap_or("").to_string(),
                message: e.message().to_string(),
            }
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Missing(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Copies the global seed, if any, into the dataset and training seeds.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if let Some(s) = c.seed {
            c.dataset.seed = s;
            c.train.seed = s;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.train.validate()?;
        self.pipeline.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_and_seed_override() {
        let c = ExperimentConfig::parse(
            "seed = 9\n[dataset]\nn_samples = 12\n[dataset.scene]\nblocker_count_max = 3\n[train]\nepochs = 2\n",
        )
        .unwrap()
        .resolved();
        assert_eq!(c.dataset.n_samples, 12);
        assert_eq!(c.dataset.scene.blocker_count_max, 3);
        assert_eq!(c.train.epochs, 2);
        assert_eq!(c.train.learning_rate, experiment_train_config().learning_rate);
        assert_eq!(c.train.batch_size, 50);
        assert_eq!((c.dataset.seed, c.train.seed), (9, 9));
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let err = ExperimentConfig::parse("[dataset]\nn_samples = 3\nbogus_key = 1\n").unwrap_err();
        match err {
            Error::Config { line, text, .. } => {
                assert_eq!(line, 3);
                assert_eq!(text, "bogus_key = 1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_train_key_reports_its_line() {
        let err = ExperimentConfig::parse("[train]\nepochs = 3\nlearnig_rate = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig {
            seed: Some(4),
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
    }
}
