use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::learn::{forward, train, Example, HistoryRecord, Standardizer, TrainConfig, TrainedModel};
use crate::scene::{LinkStatus, RenderedImage, Sample};

/// Featurization and cascade settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Images are average-pooled to `pooled_size × pooled_size × 3`.
    pub pooled_size: usize,
    /// z-score image features with training-split statistics.
    pub standardize_images: bool,
    /// UE-channel level above which the camera stage reports a visible UE.
    pub detector_threshold: f32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            pooled_size: 16,
            standardize_images: true,
            detector_threshold: 0.5,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pooled_size == 0 {
            return Err(Error::InvalidParameter("pipeline: pooled_size must be >= 1".into()));
        }
        if !(self.detector_threshold >= 0.0 && self.detector_threshold < 1.0) {
            return Err(Error::InvalidParameter(
                "pipeline: detector_threshold must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

pub fn image_features(image: &RenderedImage, pooled_size: usize) -> Result<Vec<f64>> {
    image.pooled(pooled_size, pooled_size)
}

/// A trained classifier for one scenario plus its training history.
#[derive(Debug, Clone)]
pub struct ScenarioModel {
    pub scenario: Scenario,
    pub model: TrainedModel<f64>,
    pub history: Vec<HistoryRecord>,
}

fn raw_image(scenario: Scenario, s: &Sample, pooled: usize) -> Result<Vec<f64>> {
    if scenario.uses_image() {
        image_features(&s.image, pooled)
    } else {
        Ok(Vec::new())
    }
}

impl ScenarioModel {
    pub fn example(&self, s: &Sample, pooled: usize) -> Result<Example<f64>> {
        let st = &self.model.standardizer;
        let image = raw_image(self.scenario, s, pooled)?;
        if image.len() != st.input_dim() {
            return Err(Error::shape(
                "ScenarioModel::example",
                format!("{} image features", st.input_dim()),
                image.len().to_string(),
            ));
        }
        Ok(Example {
            image: st.image(&image),
            rate: st.rate(self.scenario.raw_rate(s)),
            label: s.label.class_index(),
        })
    }

    pub fn predict(&self, s: &Sample, pooled: usize) -> Result<LinkStatus> {
        let ex = self.example(s, pooled)?;
        let b = forward(&self.model.params, &ex.image, ex.rate)?;
        Ok(LinkStatus::from_class_index(b.argmax()).expect("three classes"))
    }
}

/// Fits the standardizer on `train_set` and trains the scenario's
/// classifier on the masked features.
pub fn train_scenario(
    train_set: &[&Sample],
    scenario: Scenario,
    cfg: &TrainConfig,
    pcfg: &PipelineConfig,
) -> Result<ScenarioModel> {
    pcfg.validate()?;
    let images = train_set
        .iter()
        .map(|s| raw_image(scenario, s, pcfg.pooled_size))
        .collect::<Result<Vec<_>>>()?;
    let rates: Vec<f64> = train_set.iter().map(|s| scenario.raw_rate(s)).collect();
    let views: Vec<&[f64]> = images.iter().map(Vec::as_slice).collect();
    let mut standardizer = Standardizer::fit(&views, &rates);
    if !pcfg.standardize_images {
        let d = standardizer.input_dim();
        let id = Standardizer::identity(d);
        standardizer.image_mean = id.image_mean;
        standardizer.image_std = id.image_std;
    }
    if !scenario.uses_rate() {
        standardizer.rate_mean = 0.0;
        standardizer.rate_std = 1.0;
    }
    let examples: Vec<Example<f64>> = images
        .iter()
        .zip(train_set)
        .map(|(img, s)| Example {
            image: standardizer.image(img),
            rate: standardizer.rate(scenario.raw_rate(s)),
            label: s.label.class_index(),
        })
        .collect();
    let outcome = train(&examples, cfg)?;
    Ok(ScenarioModel {
        scenario,
        model: TrainedModel {
            tag: scenario.tag(),
            uses_image: scenario.uses_image(),
            uses_rate: scenario.uses_rate(),
            standardizer,
            params: outcome.params,
        },
        history: outcome.history,
    })
}
