//! RIS reflection matrix, the cascaded effective gain, and phase control.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::ChannelMatrix;
use super::types::RisConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Below this magnitude the direct term is treated as absent when co-phasing.
pub const ZERO_DIRECT_THRESHOLD: f64 = 1e-15;

/// Diagonal `R×R` reflection matrix with entries `α_i e^{jδ_i}`.
pub fn ris_matrix<T: Scalar>(ris: &RisConfig<T>) -> ChannelMatrix<T> {
    let coeffs: Vec<Complex<T>> = ris.coefficients().collect();
    ChannelMatrix::diag(&coeffs)
}

fn check_link_shapes<T: Scalar>(
    op: &'static str,
    h_b: &ChannelMatrix<T>,
    h_u: &ChannelMatrix<T>,
    h_r: &ChannelMatrix<T>,
) -> Result<(usize, usize)> {
    let m = h_b.cols();
    let r = h_u.cols();
    if h_b.rows() != 1 {
        return Err(Error::shape(op, "h_B of shape 1xM", format!("{:?}", h_b.shape())));
    }
    if h_u.rows() != 1 {
        return Err(Error::shape(op, "h_u of shape 1xR", format!("{:?}", h_u.shape())));
    }
    if h_r.shape() != (r, m) {
        return Err(Error::shape(
            op,
            format!("h_R of shape {r}x{m}"),
            format!("{:?}", h_r.shape()),
        ));
    }
    Ok((r, m))
}

/// `H = h_B + h_u·Δ·h_R` for an arbitrary `R×R` matrix `Δ`.
pub fn effective_gain<T: Scalar>(
    h_b: &ChannelMatrix<T>,
    h_u: &ChannelMatrix<T>,
    delta: &ChannelMatrix<T>,
    h_r: &ChannelMatrix<T>,
) -> Result<ChannelMatrix<T>> {
    let (r, _) = check_link_shapes("effective_gain", h_b, h_u, h_r)?;
    if delta.shape() != (r, r) {
        return Err(Error::shape(
            "effective_gain",
            format!("Delta of shape {r}x{r}"),
            format!("{:?}", delta.shape()),
        ));
    }
    let cascaded = h_u.matmul(delta)?.matmul(h_r)?;
    h_b.add(&cascaded)
}

/// Same as [`effective_gain`] with `Δ = ris_matrix(ris)`, exploiting the
/// diagonal structure (`O(R·M)` instead of `O(R²)`).
pub fn effective_gain_with<T: Scalar>(
    h_b: &ChannelMatrix<T>,
    h_u: &ChannelMatrix<T>,
    ris: &RisConfig<T>,
    h_r: &ChannelMatrix<T>,
) -> Result<ChannelMatrix<T>> {
    let (r, m) = check_link_shapes("effective_gain_with", h_b, h_u, h_r)?;
    if ris.len() != r {
        return Err(Error::shape(
            "effective_gain_with",
            format!("{r} RIS elements"),
            ris.len().to_string(),
        ));
    }
    let mut cascaded = vec![Complex::zero(); m];
    for (i, (coef, hu)) in ris.coefficients().zip(h_u.as_slice()).enumerate() {
        let w = *hu * coef;
        if w.is_zero() {
            continue;
        }
        for (o, hr) in cascaded.iter_mut().zip(h_r.row(i)) {
            *o += w * *hr;
        }
    }
    let cascaded = ChannelMatrix::row_vector(cascaded);
    h_b.add(&cascaded)
}

fn normalized_conj<T: Scalar>(v: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if n > T::zero() && n.is_finite() {
        Some(v.iter().map(|z| z.conj() / n).collect())
    } else {
        None
    }
}

/// Default receive-side combiner for co-phasing: the normalized conjugate of
/// `h_B` when it is nonzero, otherwise the normalized conjugate of the
/// strongest row of `h_R`, otherwise the first unit vector.
pub fn default_combiner<T: Scalar>(h_b: &ChannelMatrix<T>, h_r: &ChannelMatrix<T>) -> Vec<Complex<T>> {
    let m = h_b.cols();
    if let Some(w) = normalized_conj(h_b.as_slice()) {
        return w;
    }
    let dominant = (0..h_r.rows())
        .map(|i| (i, h_r.row(i).iter().map(|z| z.norm_sqr()).sum::<T>()))
        .fold(None, |best: Option<(usize, T)>, (i, n)| match best {
            Some((_, bn)) if bn >= n => best,
            _ => Some((i, n)),
        });
    if let Some((i, _)) = dominant {
        if let Some(w) = normalized_conj(h_r.row(i)) {
            return w;
        }
    }
    let mut e0 = vec![Complex::zero(); m];
    if m > 0 {
        e0[0] = Complex::new(T::one(), T::zero());
    }
    e0
}

/// Chooses unit-amplitude RIS phases so that every cascaded contribution
/// `h_u[i]·(h_R·w)[i]` arrives in phase with the direct term `h_B·w`.
///
/// When the direct term vanishes, all contributions are aligned with the
/// cascaded contribution of element 0.
pub fn co_phase_ris<T: Scalar>(
    h_b: &ChannelMatrix<T>,
    h_r: &ChannelMatrix<T>,
    h_u: &ChannelMatrix<T>,
    combiner: &[Complex<T>],
) -> Result<RisConfig<T>> {
    let (_, m) = check_link_shapes("co_phase_ris", h_b, h_u, h_r)?;
    if combiner.len() != m {
        return Err(Error::shape(
            "co_phase_ris",
            format!("combiner of length {m}"),
            combiner.len().to_string(),
        ));
    }
    let norm = combiner.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if (norm - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::InvalidParameter(format!(
            "combiner must have unit norm, got {norm}"
        )));
    }
    let direct = h_b.apply(combiner)?[0];
    let projected = h_r.apply(combiner)?;
    let contributions: Vec<Complex<T>> = h_u.as_slice().iter().zip(&projected).map(|(a, b)| *a * *b).collect();
    let reference = if direct.norm() < T::lit(ZERO_DIRECT_THRESHOLD) {
        contributions.first().map(|c| c.arg()).unwrap_or_else(T::zero)
    } else {
        direct.arg()
    };
    let phases: Vec<T> = contributions.iter().map(|c| reference - c.arg()).collect();
    Ok(RisConfig::from_phases(&phases))
}

/// Result of [`optimize_ris`]: the configuration and the combiner it was
/// co-phased against.
#[derive(Debug, Clone)]
pub struct RisSolution<T: Scalar> {
    pub config: RisConfig<T>,
    pub combiner: Vec<Complex<T>>,
    pub gain: ChannelMatrix<T>,
}

/// Alternates co-phasing with re-matching the combiner to the resulting
/// effective gain (`w = conj(H)/‖H‖`). Each round cannot decrease `‖H‖`;
/// stops after `max_rounds` or when the relative gain improvement drops
/// below `1e-12`.
pub fn optimize_ris<T: Scalar>(
    h_b: &ChannelMatrix<T>,
    h_r: &ChannelMatrix<T>,
    h_u: &ChannelMatrix<T>,
    max_rounds: usize,
) -> Result<RisSolution<T>> {
    let mut combiner = default_combiner(h_b, h_r);
    let mut config = co_phase_ris(h_b, h_r, h_u, &combiner)?;
    let mut gain = effective_gain_with(h_b, h_u, &config, h_r)?;
    let mut best = gain.norm_sqr();
    for _ in 1..max_rounds.max(1) {
        let Some(w) = normalized_conj(gain.as_slice()) else {
            break;
        };
        let next = co_phase_ris(h_b, h_r, h_u, &w)?;
        let next_gain = effective_gain_with(h_b, h_u, &next, h_r)?;
        let n = next_gain.norm_sqr();
        if n <= best * (T::one() + T::lit(1e-12)) {
            if n > best {
                combiner = w;
                config = next;
                gain = next_gain;
            }
            break;
        }
        best = n;
        combiner = w;
        config = next;
        gain = next_gain;
    }
    Ok(RisSolution { config, combiner, gain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    type C = Complex<f64>;

    fn row(v: &[C]) -> ChannelMatrix<f64> {
        ChannelMatrix::row_vector(v.to_vec())
    }

    fn scalar(z: C) -> ChannelMatrix<f64> {
        ChannelMatrix::from_vec(1, 1, vec![z]).unwrap()
    }

    #[test]
    fn ris_matrix_examples() {
        assert!(ris_matrix(&RisConfig::<f64>::off(3)).is_zero());
        let id = ris_matrix(&RisConfig::from_phases(&[0.0; 4]));
        assert_eq!(id, ChannelMatrix::identity(4));
        let half = ris_matrix(&RisConfig::new(vec![(0.5, FRAC_PI_2)]).unwrap());
        assert!((half.get(0, 0) - C::new(0.0, 0.5)).norm() < 1e-16);
    }

    #[test]
    fn off_diagonal_entries_are_exactly_zero() {
        let m = ris_matrix(&RisConfig::new(vec![(0.3, 1.0), (0.9, 2.0), (1.0, 3.0)]).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(m.get(i, j), C::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn effective_gain_examples() {
        let h_b = scalar(C::new(1.0, 0.0));
        let h_u = scalar(C::new(2.0, 0.0));
        let h_r = scalar(C::new(3.0, 0.0));
        let delta = scalar(C::new(0.0, 0.5));
        let h = effective_gain(&h_b, &h_u, &delta, &h_r).unwrap();
        assert!((h.get(0, 0) - C::new(1.0, 3.0)).norm() < 1e-15);

        let h = effective_gain(&h_b, &h_u, &ChannelMatrix::zeros(1, 1), &h_r).unwrap();
        assert_eq!(h, h_b);

        let zero_b = ChannelMatrix::zeros(1, 2);
        let h_u = row(&[C::new(1.0, 1.0), C::new(0.5, -2.0)]);
        let h_r = ChannelMatrix::from_vec(
            2,
            2,
            vec![C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(2.0, 0.0), C::new(-1.0, 0.5)],
        )
        .unwrap();
        let h = effective_gain(&zero_b, &h_u, &ChannelMatrix::identity(2), &h_r).unwrap();
        assert_eq!(h, h_u.matmul(&h_r).unwrap());
    }

    #[test]
    fn effective_gain_shape_errors() {
        let h_b = ChannelMatrix::<f64>::zeros(1, 2);
        let h_u = ChannelMatrix::zeros(1, 3);
        let h_r = ChannelMatrix::zeros(3, 2);
        assert!(effective_gain(&h_b, &h_u, &ChannelMatrix::zeros(2, 2), &h_r).is_err());
        assert!(effective_gain(&h_b, &h_u, &ChannelMatrix::zeros(3, 3), &ChannelMatrix::zeros(2, 3)).is_err());
        assert!(effective_gain_with(&h_b, &h_u, &RisConfig::off(2), &h_r).is_err());
    }

    #[test]
    fn diagonal_fast_path_matches_dense() {
        let h_b = row(&[C::new(0.1, 0.2), C::new(-0.3, 0.0)]);
        let h_u = row(&[C::new(1.0, -1.0), C::new(0.2, 0.7), C::new(0.0, 0.0)]);
        let h_r = ChannelMatrix::from_vec(
            3,
            2,
            (0..6).map(|i| C::new(i as f64 * 0.1, 1.0 - i as f64 * 0.3)).collect(),
        )
        .unwrap();
        let ris = RisConfig::new(vec![(0.2, 0.4), (1.0, 5.0), (0.7, 3.0)]).unwrap();
        let a = effective_gain(&h_b, &h_u, &ris_matrix(&ris), &h_r).unwrap();
        let b = effective_gain_with(&h_b, &h_u, &ris, &h_r).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn co_phase_scalar_example() {
        // h_B=1, h_u=j, h_R=1 → δ = −π/2 (wrapped to 3π/2), |H| = 2
        let (h_b, h_u, h_r) = (
            scalar(C::new(1.0, 0.0)),
            scalar(C::new(0.0, 1.0)),
            scalar(C::new(1.0, 0.0)),
        );
        let w = [C::new(1.0, 0.0)];
        let ris = co_phase_ris(&h_b, &h_r, &h_u, &w).unwrap();
        assert!((ris.elements()[0].1 - 1.5 * PI).abs() < 1e-15);
        assert_eq!(ris.elements()[0].0, 1.0);
        let h = effective_gain_with(&h_b, &h_u, &ris, &h_r).unwrap();
        assert!((h.get(0, 0).norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn already_aligned_gives_zero_phases() {
        let h_b = row(&[C::new(2.0, 0.0)]);
        let h_u = row(&[C::new(1.0, 0.0), C::new(3.0, 0.0)]);
        let h_r = ChannelMatrix::from_vec(2, 1, vec![C::new(0.5, 0.0), C::new(1.5, 0.0)]).unwrap();
        let ris = co_phase_ris(&h_b, &h_r, &h_u, &[C::new(1.0, 0.0)]).unwrap();
        for d in ris.phases() {
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn zero_direct_aligns_to_first_element() {
        let h_b = ChannelMatrix::zeros(1, 1);
        let h_u = row(&[C::new(0.0, 1.0), C::new(-1.0, 0.0)]);
        let h_r = ChannelMatrix::from_vec(2, 1, vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
        let w = default_combiner(&h_b, &h_r);
        let ris = co_phase_ris(&h_b, &h_r, &h_u, &w).unwrap();
        let h = effective_gain_with(&h_b, &h_u, &ris, &h_r).unwrap();
        assert!((h.get(0, 0) - C::new(0.0, 2.0)).norm() < 1e-15, "{h:?}");
    }

    #[test]
    fn combiner_must_be_unit_norm() {
        let h = scalar(C::new(1.0, 0.0));
        assert!(co_phase_ris(&h, &h, &h, &[C::new(2.0, 0.0)]).is_err());
        assert!(co_phase_ris(&h, &h, &h, &[C::new(1.0, 0.0), C::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn default_combiner_fallbacks() {
        let h_b = row(&[C::new(3.0, 4.0)]);
        let w = default_combiner(&h_b, &ChannelMatrix::zeros(1, 1));
        assert!((w[0] - C::new(0.6, -0.8)).norm() < 1e-15);

        let h_r = ChannelMatrix::from_vec(
            2,
            2,
            vec![C::new(0.1, 0.0), C::new(0.0, 0.0), C::new(0.0, 2.0), C::new(0.0, 0.0)],
        )
        .unwrap();
        let w = default_combiner(&ChannelMatrix::zeros(1, 2), &h_r);
        assert!((w[0] - C::new(0.0, -1.0)).norm() < 1e-15);

        let w = default_combiner(&ChannelMatrix::<f64>::zeros(1, 3), &ChannelMatrix::zeros(2, 3));
        assert_eq!(w[0], C::new(1.0, 0.0));
    }

    #[test]
    fn optimize_never_worse_than_single_pass() {
        let h_b = row(&[C::new(0.1, 0.0), C::new(0.0, 0.05)]);
        let h_u = row(&[C::new(1.0, 0.2), C::new(-0.4, 0.9), C::new(0.3, 0.3)]);
        let h_r = ChannelMatrix::from_vec(
            3,
            2,
            vec![
                C::new(0.0, 1.0),
                C::new(1.0, 0.0),
                C::new(0.5, -0.5),
                C::new(0.2, 0.9),
                C::new(-1.0, 0.1),
                C::new(0.3, 0.3),
            ],
        )
        .unwrap();
        let w = default_combiner(&h_b, &h_r);
        let single = effective_gain_with(&h_b, &h_u, &co_phase_ris(&h_b, &h_r, &h_u, &w).unwrap(), &h_r).unwrap();
        let sol = optimize_ris(&h_b, &h_r, &h_u, 20).unwrap();
        assert!(sol.gain.norm_sqr() >= single.norm_sqr());
    }
}
