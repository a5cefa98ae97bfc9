use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{backward, Example, MlpParams, DEFAULT_HIDDEN};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// SGD hyperparameters. Defaults: batch 50, learning rate 1e-3, weight
/// decay 2e-3, rate cut by 0.2 at epochs 5 and 8, 10 epochs, 70 % train split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub schedule_epochs: Vec<usize>,
    pub lr_reduction_factor: f64,
    pub epochs: usize,
    pub train_fraction: f64,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 50,
            learning_rate: 1e-3,
            weight_decay: 2e-3,
            schedule_epochs: vec![5, 8],
            lr_reduction_factor: 0.2,
            epochs: 10,
            train_fraction: 0.7,
            hidden: DEFAULT_HIDDEN,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad(format!("weight_decay must be >= 0, got {}", self.weight_decay));
        }
        if !(self.lr_reduction_factor.is_finite() && self.lr_reduction_factor > 0.0 && self.lr_reduction_factor <= 1.0)
        {
            return bad(format!(
                "lr_reduction_factor must lie in (0, 1], got {}",
                self.lr_reduction_factor
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        Ok(())
    }
}

/// Learning rate for a 1-based epoch: the base rate times the reduction
/// factor once for every schedule epoch at or before `epoch`.
pub fn lr_schedule(epoch: usize, cfg: &TrainConfig) -> f64 {
    let cuts = cfg.schedule_epochs.iter().filter(|&&e| e <= epoch).count();
    cfg.learning_rate * cfg.lr_reduction_factor.powi(cuts as i32)
}

/// `w ← w − lr·g`, elementwise over every tensor.
pub fn sgd_step<T: Scalar>(params: &MlpParams<T>, grads: &MlpParams<T>, lr: T) -> Result<MlpParams<T>> {
    let mut out = params.clone();
    sgd_step_in_place(&mut out, grads, lr)?;
    Ok(out)
}

pub(crate) fn sgd_step_in_place<T: Scalar>(params: &mut MlpParams<T>, grads: &MlpParams<T>, lr: T) -> Result<()> {
    for (p, g) in params.tensors_mut().into_iter().zip(grads.tensors()) {
        if p.shape() != g.shape() {
            return Err(Error::shape(
                "sgd_step",
                format!("{:?}", p.shape()),
                format!("{:?}", g.shape()),
            ));
        }
        for (w, d) in p.data_mut().iter_mut().zip(g.data()) {
            *w -= lr * *d;
        }
    }
    Ok(())
}

/// One row of the training history, recorded every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub epoch: usize,
    pub lr: f64,
    pub loss: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub params: MlpParams<T>,
    pub history: Vec<HistoryRecord>,
}

impl<T> TrainOutcome<T> {
    /// Mean batch loss over each epoch, in epoch order.
    pub fn epoch_losses(&self) -> Vec<f64> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in &self.history {
            if out.len() < r.epoch {
                out.resize(r.epoch, (0.0, 0));
            }
            let e = &mut out[r.epoch - 1];
            e.0 += r.loss;
            e.1 += 1;
        }
        out.into_iter()
            .map(|(s, n)| if n == 0 { f64::NAN } else { s / n as f64 })
            .collect()
    }
}

const SHUFFLE_STREAM: u64 = 0x5348_5546_464c_4531;

/// Mini-batch SGD over `train_set` for `cfg.epochs` epochs.
///
/// Initialization and shuffling are seeded from `cfg.seed`, and examples
/// are processed in a fixed order, so the result is bit-reproducible.
pub fn train<T: Scalar>(train_set: &[Example<T>], cfg: &TrainConfig) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let first = train_set
        .first()
        .ok_or_else(|| Error::InvalidParameter("training set is empty".into()))?;
    let d_in = first.image.len();
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = MlpParams::init(d_in, cfg.hidden, &mut init_rng);
    train_from(params, train_set, cfg)
}

/// Like [`train`] but starting from the given parameters.
pub fn train_from<T: Scalar>(
    mut params: MlpParams<T>,
    train_set: &[Example<T>],
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidParameter("training set is empty".into()));
    }
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::new();
    let mut iteration = 0;
    let wd = T::lit(cfg.weight_decay);
    let mut batch: Vec<Example<T>> = Vec::with_capacity(cfg.batch_size);

    for epoch in 1..=cfg.epochs {
        let lr = lr_schedule(epoch, cfg);
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_set[i].clone()));
            let step = backward(&params, &batch, wd)?;
            sgd_step_in_place(&mut params, &step.grads, T::lit(lr))?;
            iteration += 1;
            history.push(HistoryRecord {
                iteration,
                epoch,
                lr,
                loss: step.mean_loss.to_f64_lossless(),
                train_accuracy: step.correct as f64 / chunk.len() as f64,
            });
        }
    }
    Ok(TrainOutcome { params, history })
}
