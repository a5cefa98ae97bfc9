//! Two-layer perceptron over image features with the rate feature appended
//! after the hidden layer:
//!
//! ```text
//! h      = relu(x · W1 + b1)            W1: d_in × hidden
//! logits = [h, rate] · W2 + b2          W2: (hidden + 1) × 3
//! b      = softmax(logits)
//! ```

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const NUM_CLASSES: usize = 3;
pub const DEFAULT_HIDDEN: usize = 64;

/// Smallest probability fed to the logarithm in [`cross_entropy`].
pub const PROB_FLOOR: f64 = 1e-12;

/// Normalized class probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbVector<T> {
    probs: [T; NUM_CLASSES],
}

impl<T: Scalar> ProbVector<T> {
    /// Validates nonnegativity and unit sum (within 1e-9).
    pub fn new(probs: [T; NUM_CLASSES]) -> Result<Self> {
        let sum: T = probs.iter().copied().sum();
        if probs.iter().any(|p| !(*p >= T::zero() && *p <= T::one())) || (sum - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::InvalidParameter(format!("not a probability vector: {probs:?}")));
        }
        Ok(ProbVector { probs })
    }

    /// Softmax of raw logits (max-shifted).
    pub fn softmax(logits: [T; NUM_CLASSES]) -> Self {
        let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let mut probs = logits.map(|z| (z - max).exp());
        let total: T = probs.iter().copied().sum();
        for p in probs.iter_mut() {
            *p /= total;
        }
        ProbVector { probs }
    }

    pub fn as_array(&self) -> &[T; NUM_CLASSES] {
        &self.probs
    }

    pub fn argmax(&self) -> usize {
        argmax_index(&self.probs)
    }
}

/// Index of the largest entry; ties go to the lowest index.
///
/// # Panics
/// On an empty slice.
pub fn argmax_index<T: PartialOrd + Copy>(values: &[T]) -> usize {
    assert!(!values.is_empty(), "argmax of an empty list");
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// `−ln b[label]`, with `b[label]` clamped to [`PROB_FLOOR`].
pub fn cross_entropy<T: Scalar>(b: &ProbVector<T>, label: usize) -> T {
    -b.probs[label].max(T::lit(PROB_FLOOR)).ln()
}

/// One training or evaluation example, already standardized.
#[derive(Debug, Clone, PartialEq)]
pub struct Example<T> {
    pub image: Vec<T>,
    pub rate: T,
    pub label: usize,
}

/// Classifier parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams<T> {
    pub w1: Tensor<T>,
    pub b1: Tensor<T>,
    pub w2: Tensor<T>,
    pub b2: Tensor<T>,
}

impl<T: Scalar> MlpParams<T> {
    pub fn zeros(d_in: usize, hidden: usize) -> Self {
        MlpParams {
            w1: Tensor::zeros(vec![d_in, hidden]),
            b1: Tensor::zeros(vec![hidden]),
            w2: Tensor::zeros(vec![hidden + 1, NUM_CLASSES]),
            b2: Tensor::zeros(vec![NUM_CLASSES]),
        }
    }

    /// Zero-mean normal weights with standard deviation `1/√fan_in`,
    /// zero biases.
    pub fn init<R: Rng + ?Sized>(d_in: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(d_in, hidden);
        fill_normal(p.w1.data_mut(), d_in, rng);
        fill_normal(p.w2.data_mut(), hidden + 1, rng);
        p
    }

    /// Assembles parameters from tensors, checking that their shapes agree.
    pub fn from_tensors(w1: Tensor<T>, b1: Tensor<T>, w2: Tensor<T>, b2: Tensor<T>) -> Result<Self> {
        let p = MlpParams { w1, b1, w2, b2 };
        p.check_shapes()?;
        Ok(p)
    }

    fn check_shapes(&self) -> Result<()> {
        let (d_in, hidden) = match self.w1.shape() {
            [a, b] => (*a, *b),
            s => return Err(Error::shape("MlpParams", "2-D W1", format!("{s:?}"))),
        };
        let ok = self.b1.shape() == [hidden]
            && self.w2.shape() == [hidden + 1, NUM_CLASSES]
            && self.b2.shape() == [NUM_CLASSES];
        if !ok {
            return Err(Error::shape(
                "MlpParams",
                format!(
                    "W1 {d_in}x{hidden}, b1 {hidden}, W2 {}x{NUM_CLASSES}, b2 {NUM_CLASSES}",
                    hidden + 1
                ),
                format!(
                    "b1 {:?}, W2 {:?}, b2 {:?}",
                    self.b1.shape(),
                    self.w2.shape(),
                    self.b2.shape()
                ),
            ));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.w1.shape()[0]
    }

    pub fn hidden_dim(&self) -> usize {
        self.b1.len()
    }

    pub fn tensors(&self) -> [&Tensor<T>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<T>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Sum of squared weights (biases excluded), the L2 penalty base.
    pub fn weight_norm_sqr(&self) -> T {
        self.w1.data().iter().chain(self.w2.data()).map(|w| *w * *w).sum()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden_dim())
    }

    /// Largest absolute entry over all tensors.
    pub fn max_abs(&self) -> T {
        self.tensors().iter().fold(T::zero(), |m, t| m.max(t.max_abs()))
    }
}

fn fill_normal<T: Scalar, R: Rng + ?Sized>(out: &mut [T], fan_in: usize, rng: &mut R) {
    let std = 1.0 / (fan_in.max(1) as f64).sqrt();
    let normal = Normal::new(0.0, std).expect("finite std");
    for w in out.iter_mut() {
        *w = T::lit(normal.sample(rng));
    }
}

/// Intermediate values kept for the backward pass.
pub(crate) struct ForwardCache<T> {
    pub hidden: Vec<T>,
    pub probs: ProbVector<T>,
}

fn check_input<T: Scalar>(params: &MlpParams<T>, image: &[T]) -> Result<()> {
    if image.len() != params.input_dim() {
        return Err(Error::shape(
            "forward",
            format!("{} image features", params.input_dim()),
            image.len().to_string(),
        ));
    }
    Ok(())
}

pub(crate) fn forward_cached<T: Scalar>(params: &MlpParams<T>, image: &[T], rate: T) -> ForwardCache<T> {
    let hdim = params.hidden_dim();
    let w1 = params.w1.data();
    let mut hidden = params.b1.data().to_vec();
    for (i, &x) in image.iter().enumerate() {
        if x == T::zero() {
            continue;
        }
        for (h, w) in hidden.iter_mut().zip(&w1[i * hdim..(i + 1) * hdim]) {
            *h += x * *w;
        }
    }
    for h in hidden.iter_mut() {
        if *h < T::zero() {
            *h = T::zero();
        }
    }
    let w2 = params.w2.data();
    let mut logits = [T::zero(); NUM_CLASSES];
    logits.copy_from_slice(params.b2.data());
    for (j, &h) in hidden.iter().chain(std::iter::once(&rate)).enumerate() {
        if h == T::zero() {
            continue;
        }
        for (c, z) in logits.iter_mut().enumerate() {
            *z += h * w2[j * NUM_CLASSES + c];
        }
    }
    ForwardCache {
        hidden,
        probs: ProbVector::softmax(logits),
    }
}

/// Class probabilities for one input.
pub fn forward<T: Scalar>(params: &MlpParams<T>, image: &[T], rate: T) -> Result<ProbVector<T>> {
    check_input(params, image)?;
    if !rate.is_finite() {
        return Err(Error::InvalidParameter("rate feature must be finite".into()));
    }
    Ok(forward_cached(params, image, rate).probs)
}

/// Mean cross-entropy over `batch` plus `(weight_decay/2)·Σw²`, the
/// objective whose gradient [`backward`] returns.
pub fn objective<T: Scalar>(params: &MlpParams<T>, batch: &[Example<T>], weight_decay: T) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    let mut total = T::zero();
    for ex in batch {
        total += cross_entropy(&forward(params, &ex.image, ex.rate)?, ex.label);
    }
    Ok(total / T::from_count(batch.len()) + T::lit(0.5) * weight_decay * params.weight_norm_sqr())
}

/// Gradient of [`objective`] plus the batch's mean cross-entropy and the
/// number of correctly classified examples.
pub struct BatchGradient<T> {
    pub grads: MlpParams<T>,
    pub mean_loss: T,
    pub correct: usize,
}

/// Analytic gradient of the mean cross-entropy over `batch` with the L2
/// term `weight_decay·w` added for every weight (biases are not decayed).
pub fn backward<T: Scalar>(params: &MlpParams<T>, batch: &[Example<T>], weight_decay: T) -> Result<BatchGradient<T>> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    let hdim = params.hidden_dim();
    let mut g = params.zeros_like();
    let mut loss = T::zero();
    let mut correct = 0;
    let scale = T::one() / T::from_count(batch.len());
    let w2 = params.w2.data();
    let mut dhidden = vec![T::zero(); hdim];

    for ex in batch {
        check_input(params, &ex.image)?;
        if ex.label >= NUM_CLASSES {
            return Err(Error::InvalidParameter(format!("label {} out of range", ex.label)));
        }
        let cache = forward_cached(params, &ex.image, ex.rate);
        loss += cross_entropy(&cache.probs, ex.label);
        if cache.probs.argmax() == ex.label {
            correct += 1;
        }
        let mut dlogits = *cache.probs.as_array();
        dlogits[ex.label] -= T::one();
        for d in dlogits.iter_mut() {
            *d *= scale;
        }

        for (c, d) in dlogits.iter().enumerate() {
            g.b2.data_mut()[c] += *d;
        }
        let gw2 = g.w2.data_mut();
        for (j, &h) in cache.hidden.iter().chain(std::iter::once(&ex.rate)).enumerate() {
            if h == T::zero() {
                continue;
            }
            for (c, d) in dlogits.iter().enumerate() {
                gw2[j * NUM_CLASSES + c] += h * *d;
            }
        }

        let mut any_active = false;
        for (j, dh) in dhidden.iter_mut().enumerate() {
            *dh = if cache.hidden[j] > T::zero() {
                any_active = true;
                (0..NUM_CLASSES).map(|c| w2[j * NUM_CLASSES + c] * dlogits[c]).sum()
            } else {
                T::zero()
            };
        }
        if !any_active {
            continue;
        }
        for (gb, dh) in g.b1.data_mut().iter_mut().zip(&dhidden) {
            *gb += *dh;
        }
        let gw1 = g.w1.data_mut();
        for (i, &x) in ex.image.iter().enumerate() {
            if x == T::zero() {
                continue;
            }
            for (gw, dh) in gw1[i * hdim..(i + 1) * hdim].iter_mut().zip(&dhidden) {
                *gw += x * *dh;
            }
        }
    }

    if weight_decay != T::zero() {
        for (gw, w) in g.w1.data_mut().iter_mut().zip(params.w1.data()) {
            *gw += weight_decay * *w;
        }
        for (gw, w) in g.w2.data_mut().iter_mut().zip(params.w2.data()) {
            *gw += weight_decay * *w;
        }
    }

    Ok(BatchGradient {
        grads: g,
        mean_loss: loss * scale,
        correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_give_uniform() {
        let p = MlpParams::<f64>::zeros(5, 4);
        let b = forward(&p, &[0.3, 0.1, 0.0, 1.0, -2.0], 0.7).unwrap();
        for v in b.as_array() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_hand_example() {
        let b = ProbVector::softmax([0.0_f64, 0.0, 2.0_f64.ln()]);
        let e = [0.25, 0.25, 0.5];
        for (v, x) in b.as_array().iter().zip(e) {
            assert!((v - x).abs() < 1e-15);
        }
    }

    #[test]
    fn logits_hand_example_through_output_bias() {
        let mut p = MlpParams::<f64>::zeros(2, 3);
        p.b2.data_mut()[2] = 2.0_f64.ln();
        let b = forward(&p, &[1.0, 1.0], 0.0).unwrap();
        assert!((b.as_array()[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_wrong_input_dim() {
        let p = MlpParams::<f64>::zeros(4, 2);
        assert!(forward(&p, &[0.0; 3], 0.0).is_err());
        assert!(forward(&p, &[0.0; 4], f64::NAN).is_err());
    }

    #[test]
    fn cross_entropy_examples() {
        let one_hot = ProbVector::new([0.0_f64, 1.0, 0.0]).unwrap();
        assert_eq!(cross_entropy(&one_hot, 1), 0.0);
        let uniform = ProbVector::softmax([0.0_f64; 3]);
        assert!((cross_entropy(&uniform, 0) - 3.0_f64.ln()).abs() < 1e-12);
        let half = ProbVector::new([0.5_f64, 0.25, 0.25]).unwrap();
        assert!((cross_entropy(&half, 0) - 2.0_f64.ln()).abs() < 1e-15);
        // clamp keeps the loss finite
        assert!((cross_entropy(&one_hot, 0) - (-(1e-12_f64).ln())).abs() < 1e-9);
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_index(&[0.2, 0.5, 0.3]), 1);
        assert_eq!(argmax_index(&[1.0 / 3.0; 3]), 0);
        assert_eq!(argmax_index(&[0.1, 0.1, 0.8]), 2);
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new([0.5_f64, 0.5, 0.1]).is_err());
        assert!(ProbVector::new([-0.1_f64, 0.6, 0.5]).is_err());
    }

    #[test]
    fn init_scale_tracks_fan_in() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = MlpParams::<f64>::init(400, 64, &mut rng);
        let var: f64 = p.w1.data().iter().map(|w| w * w).sum::<f64>() / p.w1.len() as f64;
        assert!((var * 400.0 - 1.0).abs() < 0.05, "{var}");
        assert!(p.b1.data().iter().all(|b| *b == 0.0));
    }

    #[test]
    fn duplicated_batch_has_same_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = MlpParams::<f64>::init(6, 5, &mut rng);
        let batch: Vec<Example<f64>> = (0..4)
            .map(|i| Example {
                image: (0..6).map(|j| ((i * 7 + j) as f64 * 0.37).sin()).collect(),
                rate: i as f64 * 0.5 - 1.0,
                label: i % 3,
            })
            .collect();
        let doubled: Vec<Example<f64>> = batch.iter().chain(batch.iter()).cloned().collect();
        let a = backward(&p, &batch, 2e-3).unwrap();
        let b = backward(&p, &doubled, 2e-3).unwrap();
        for (ta, tb) in a.grads.tensors().iter().zip(b.grads.tensors()) {
            for (x, y) in ta.data().iter().zip(tb.data()) {
                assert!((x - y).abs() <= 1e-15 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn confident_correct_prediction_has_tiny_gradient() {
        let mut p = MlpParams::<f64>::zeros(3, 2);
        p.b2.data_mut().copy_from_slice(&[0.0, 40.0, 0.0]);
        let batch = vec![Example {
            image: vec![0.5, -0.2, 1.0],
            rate: 0.3,
            label: 1,
        }];
        let g = backward(&p, &batch, 0.0).unwrap();
        assert!(g.grads.max_abs() <= 1e-9);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let p = MlpParams::<f64>::zeros(2, 2);
        assert!(backward(&p, &[], 0.0).is_err());
    }
}
