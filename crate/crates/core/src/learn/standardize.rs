use crate::scalar::Scalar;

/// Standard deviations below this are treated as 1 (constant feature).
const MIN_STD: f64 = 1e-12;

/// Per-feature z-scoring fitted on the training split and stored with the
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub image_mean: Vec<f64>,
    pub image_std: Vec<f64>,
    pub rate_mean: f64,
    pub rate_std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 1.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    (mean, if std < MIN_STD { 1.0 } else { std })
}

impl Standardizer {
    /// Identity transform for `d_in` image features.
    pub fn identity(d_in: usize) -> Self {
        Standardizer {
            image_mean: vec![0.0; d_in],
            image_std: vec![1.0; d_in],
            rate_mean: 0.0,
            rate_std: 1.0,
        }
    }

    /// Fits means and (population) standard deviations.
    pub fn fit(images: &[&[f64]], rates: &[f64]) -> Self {
        let d_in = images.first().map_or(0, |x| x.len());
        let mut image_mean = Vec::with_capacity(d_in);
        let mut image_std = Vec::with_capacity(d_in);
        for i in 0..d_in {
            let (m, s) = mean_std(images.iter().map(move |x| x[i]));
            image_mean.push(m);
            image_std.push(s);
        }
        let (rate_mean, rate_std) = mean_std(rates.iter().copied());
        Standardizer {
            image_mean,
            image_std,
            rate_mean,
            rate_std,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.image_mean.len()
    }

    pub fn image<T: Scalar>(&self, raw: &[f64]) -> Vec<T> {
        raw.iter()
            .zip(self.image_mean.iter().zip(&self.image_std))
            .map(|(x, (m, s))| T::lit((x - m) / s))
            .collect()
    }

    pub fn rate<T: Scalar>(&self, raw: f64) -> T {
        T::lit((raw - self.rate_mean) / self.rate_std)
    }
}
