use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mlp::{backward, objective, Example, MlpParams, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Denominator floor for the relative error, so that gradient entries that
/// are zero up to rounding do not report huge relative errors.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// Per-tensor and overall maximum relative error between an analytic
/// gradient and central finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// `[W1, b1, W2, b2]`; an empty tensor reports 0.
    pub per_tensor: [f64; 4],
    pub checked: usize,
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Compares the backpropagated gradient of the training objective on
/// `batch` against central differences with step `h`, over every parameter.
pub fn grad_check<T: Scalar>(
    params: &MlpParams<T>,
    batch: &[Example<T>],
    weight_decay: T,
    h: T,
) -> Result<GradCheckReport> {
    let analytic = backward(params, batch, weight_decay)?.grads;
    compare_gradients(params, batch, weight_decay, h, &analytic)
}

/// Finite-difference comparison against a caller-supplied gradient.
pub fn compare_gradients<T: Scalar>(
    params: &MlpParams<T>,
    batch: &[Example<T>],
    weight_decay: T,
    h: T,
    analytic: &MlpParams<T>,
) -> Result<GradCheckReport> {
    if h.is_nan() || h <= T::zero() {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be > 0, got {h}"
        )));
    }
    let mut probe = params.clone();
    let mut per_tensor = [0.0_f64; 4];
    let mut checked = 0;
    for (t, worst) in per_tensor.iter_mut().enumerate() {
        let n = params.tensors()[t].len();
        if analytic.tensors()[t].len() != n {
            return Err(Error::shape(
                "compare_gradients",
                format!("{n} gradient entries"),
                analytic.tensors()[t].len().to_string(),
            ));
        }
        for i in 0..n {
            let orig = params.tensors()[t].data()[i];
            probe.tensors_mut()[t].data_mut()[i] = orig + h;
            let up = objective(&probe, batch, weight_decay)?;
            probe.tensors_mut()[t].data_mut()[i] = orig - h;
            let down = objective(&probe, batch, weight_decay)?;
            probe.tensors_mut()[t].data_mut()[i] = orig;
            let numeric = ((up - down) / (h + h)).to_f64_lossless();
            let a = analytic.tensors()[t].data()[i].to_f64_lossless();
            *worst = worst.max(relative_error(a, numeric));
            checked += 1;
        }
    }
    Ok(GradCheckReport {
        max_relative_error: per_tensor.iter().copied().fold(0.0, f64::max),
        per_tensor,
        checked,
    })
}

/// Runs [`grad_check`] in `f64` with step `1e-5` on `draws` random networks
/// (input width, hidden width, batch, labels, weight decay and parameters
/// all drawn from `seed`).
pub fn random_grad_checks(seed: u64, draws: usize) -> Result<Vec<GradCheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let d_in = rng.random_range(1..=12);
            let hidden = rng.random_range(1..=10);
            let p = MlpParams::<f64>::init(d_in, hidden, &mut rng);
            let batch: Vec<Example<f64>> = (0..rng.random_range(1..=6))
                .map(|_| Example {
                    image: (0..d_in).map(|_| rng.random_range(-2.0..2.0)).collect(),
                    rate: rng.random_range(-2.0..2.0),
                    label: rng.random_range(0..NUM_CLASSES),
                })
                .collect();
            let wd = rng.random_range(0.0..1e-2);
            grad_check(&p, &batch, wd, 1e-5)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn batch(rng: &mut ChaCha8Rng, d_in: usize, n: usize) -> Vec<Example<f64>> {
        (0..n)
            .map(|i| Example {
                image: (0..d_in).map(|_| rng.random_range(-1.0..1.0)).collect(),
                rate: rng.random_range(-2.0..2.0),
                label: i % 3,
            })
            .collect()
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = MlpParams::init(7, 6, &mut rng);
        let b = batch(&mut rng, 7, 4);
        let r = grad_check(&p, &b, 2e-3, 1e-5).unwrap();
        assert!(r.max_relative_error <= 1e-4, "{r:?}");
        assert_eq!(r.checked, p.num_parameters());
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = MlpParams::init(5, 4, &mut rng);
        let b = batch(&mut rng, 5, 3);
        let mut g = backward(&p, &b, 0.0).unwrap().grads;
        g.w2.data_mut()[2] += 1.0;
        let r = compare_gradients(&p, &b, 0.0, 1e-5, &g).unwrap();
        assert!(r.max_relative_error > 1e-2);
    }

    #[test]
    fn empty_layers_report_zero() {
        let p = MlpParams::<f64>::zeros(0, 0);
        let b = vec![Example {
            image: vec![],
            rate: 0.4,
            label: 2,
        }];
        let r = grad_check(&p, &b, 0.0, 1e-5).unwrap();
        assert_eq!(r.per_tensor[0], 0.0);
        assert_eq!(r.per_tensor[1], 0.0);
        assert!(r.max_relative_error <= 1e-4);
    }

    #[test]
    fn random_draws_are_seeded() {
        let a = random_grad_checks(5, 3).unwrap();
        assert_eq!(a, random_grad_checks(5, 3).unwrap());
        assert!(a.iter().all(|r| r.max_relative_error <= 1e-4), "{a:?}");
    }

    #[test]
    fn rejects_non_positive_step() {
        let p = MlpParams::<f64>::zeros(1, 1);
        let b = vec![Example {
            image: vec![1.0],
            rate: 0.0,
            label: 0,
        }];
        assert!(grad_check(&p, &b, 0.0, 0.0).is_err());
    }
}
