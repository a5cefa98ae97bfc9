use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scene::mix_seed;

const SPLIT_STREAM: u64 = 0x5350_4c49_5400_0001;

/// Seeded shuffle of `0..n` split into train and test index lists. The
/// train side gets `floor(n·fraction)` items, clamped so neither side is
/// empty.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "cannot split {n} samples; need at least 2"
        )));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(seed, SPLIT_STREAM)));
    let n_train = ((n as f64 * train_fraction).floor() as usize).clamp(1, n - 1);
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split_dataset<T: Clone>(samples: &[T], train_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let (tr, te) = split_indices(samples.len(), train_fraction, seed)?;
    Ok((
        tr.into_iter().map(|i| samples[i].clone()).collect(),
        te.into_iter().map(|i| samples[i].clone()).collect(),
    ))
}
