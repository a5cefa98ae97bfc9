//! Multipath channel gains for the three links (BS→UE, BS→RIS, RIS→UE).
//!
//! Every link is a sum over paths `k = 1..K` and cyclic-prefix taps
//! `d = 0..D_k−1` of
//!
//! ```text
//! α_k · exp(−j·(k/K)·Φ_k) · p(d·t_k − τ_k) · steering(θ_k, φ_k)
//! Φ_k = 2π f τ_k − 2π f_s t_k cos θ_k − φ_k
//! ```
//!
//! where `f_s` is the Doppler spread for links that end at the mobile UE and
//! zero for the static BS→RIS link.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::ChannelMatrix;
use super::types::{ArrayGeometry, BsRisPath, MultipathComponent, PropagationConfig};
use crate::error::Result;
use crate::scalar::Scalar;

/// Doppler spread `f·v/c`.
pub fn doppler_spread<T: Scalar>(cfg: &PropagationConfig<T>) -> T {
    cfg.carrier_frequency_hz() * cfg.ue_speed_mps() / PropagationConfig::<T>::speed_of_light()
}

/// Path phase `Φ = 2πfτ − 2π f_s t cos θ − φ`.
pub fn phase_term<T: Scalar>(
    carrier_hz: T,
    doppler_hz: T,
    delay_s: T,
    sampling_time_s: T,
    azimuth_rad: T,
    elevation_rad: T,
) -> T {
    let two_pi = T::TAU();
    two_pi * carrier_hz * delay_s - two_pi * doppler_hz * sampling_time_s * azimuth_rad.cos() - elevation_rad
}

/// Uniform-linear-array response: entry `m` is
/// `exp(j·2π·spacing·m·sin θ·cos φ)`.
pub fn steering_vector<T: Scalar>(
    n_elements: usize,
    azimuth_rad: T,
    elevation_rad: T,
    spacing_wavelengths: T,
) -> Vec<Complex<T>> {
    let progression = T::TAU() * spacing_wavelengths * azimuth_rad.sin() * elevation_rad.cos();
    (0..n_elements)
        .map(|m| {
            if m == 0 {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::from_polar(T::one(), progression * T::from_count(m))
            }
        })
        .collect()
}

/// Scalar weight of path `k` (1-based) out of `total`: the `k/K`-scaled phase
/// rotation, the pulse summed over cyclic-prefix taps, and the amplitude.
fn path_coefficient<T: Scalar>(
    path: &MultipathComponent<T>,
    k: usize,
    total: usize,
    carrier_hz: T,
    doppler_hz: T,
    cfg: &PropagationConfig<T>,
) -> Complex<T> {
    let phi = phase_term(
        carrier_hz,
        doppler_hz,
        path.delay_s,
        path.sampling_time_s,
        path.azimuth_rad,
        path.elevation_rad,
    );
    let ratio = T::from_count(k) / T::from_count(total);
    let rotation = Complex::from_polar(T::one(), -(ratio * phi));
    let taps: T = (0..path.cyclic_prefix_count)
        .map(|d| {
            cfg.pulse().eval(
                T::from_count(d) * path.sampling_time_s - path.delay_s,
                path.sampling_time_s,
            )
        })
        .sum();
    path.amplitude * rotation * taps
}

fn row_link<T: Scalar>(
    paths: &[MultipathComponent<T>],
    cfg: &PropagationConfig<T>,
    n_elements: usize,
    spacing: T,
    doppler_hz: T,
) -> Result<ChannelMatrix<T>> {
    let mut out = vec![Complex::zero(); n_elements];
    let total = paths.len();
    for (idx, path) in paths.iter().enumerate() {
        path.validate()?;
        let coeff = path_coefficient(path, idx + 1, total, cfg.carrier_frequency_hz(), doppler_hz, cfg);
        let a = steering_vector(n_elements, path.azimuth_rad, path.elevation_rad, spacing);
        for (o, s) in out.iter_mut().zip(&a) {
            *o += coeff * *s;
        }
    }
    Ok(ChannelMatrix::row_vector(out))
}

/// Direct BS→UE gain, `1×M`, with Doppler.
pub fn channel_bs_ue<T: Scalar>(
    paths: &[MultipathComponent<T>],
    cfg: &PropagationConfig<T>,
    geom: &ArrayGeometry<T>,
) -> Result<ChannelMatrix<T>> {
    geom.validate()?;
    row_link(
        paths,
        cfg,
        geom.num_bs_antennas,
        geom.element_spacing_wavelengths,
        doppler_spread(cfg),
    )
}

/// RIS→UE gain, `1×R`, with Doppler.
pub fn channel_ris_ue<T: Scalar>(
    paths: &[MultipathComponent<T>],
    cfg: &PropagationConfig<T>,
    geom: &ArrayGeometry<T>,
) -> Result<ChannelMatrix<T>> {
    geom.validate()?;
    row_link(
        paths,
        cfg,
        geom.num_ris_elements,
        geom.element_spacing_wavelengths,
        doppler_spread(cfg),
    )
}

/// BS→RIS gain, `R×M`. Both ends are static so the Doppler term is zero;
/// each path contributes `outer(b_RIS(arrival), a_BS(departure))`.
pub fn channel_bs_ris<T: Scalar>(
    paths: &[BsRisPath<T>],
    cfg: &PropagationConfig<T>,
    geom: &ArrayGeometry<T>,
) -> Result<ChannelMatrix<T>> {
    geom.validate()?;
    let (r, m) = (geom.num_ris_elements, geom.num_bs_antennas);
    let spacing = geom.element_spacing_wavelengths;
    let mut out = ChannelMatrix::zeros(r, m);
    let total = paths.len();
    for (idx, p) in paths.iter().enumerate() {
        p.validate()?;
        let coeff = path_coefficient(&p.path, idx + 1, total, cfg.carrier_frequency_hz(), T::zero(), cfg);
        let ris_side = steering_vector(r, p.path.azimuth_rad, p.path.elevation_rad, spacing);
        let bs_side: Vec<Complex<T>> = steering_vector(m, p.departure_azimuth_rad, p.departure_elevation_rad, spacing)
            .into_iter()
            .map(|a| a * coeff)
            .collect();
        let data = out.as_mut_slice();
        for (i, b) in ris_side.iter().enumerate() {
            for (o, a) in data[i * m..(i + 1) * m].iter_mut().zip(&bs_side) {
                *o += *b * *a;
            }
        }
    }
    Ok(out)
}
