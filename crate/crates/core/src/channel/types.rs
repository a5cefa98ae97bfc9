use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_MPS: f64 = 299_792_458.0;

/// Pulse-shaping function applied to the sampled delay offset `d·t − τ`.
///
/// The argument is normalized by the path's sampling time before shaping,
/// so `Sinc` evaluates `sinc((d·t − τ)/t)` with `sinc(x) = sin(πx)/(πx)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pulse {
    #[default]
    Sinc,
    /// Unit-height rectangle on `|x| < 1/2`.
    Rect,
    /// `p ≡ 1`.
    Flat,
}

impl Pulse {
    pub fn eval<T: Scalar>(self, offset_s: T, sampling_time_s: T) -> T {
        let x = offset_s / sampling_time_s;
        match self {
            Pulse::Sinc => {
                if x.abs() < T::lit(1e-12) {
                    T::one()
                } else {
                    let px = T::PI() * x;
                    px.sin() / px
                }
            }
            Pulse::Rect => {
                if x.abs() < T::lit(0.5) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Pulse::Flat => T::one(),
        }
    }
}

/// Carrier, mobility, and link-budget parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig<T> {
    carrier_frequency_hz: T,
    ue_speed_mps: T,
    snr_linear: T,
    pulse: Pulse,
}

impl<T: Scalar> PropagationConfig<T> {
    pub fn new(carrier_frequency_hz: T, ue_speed_mps: T, snr_linear: T) -> Result<Self> {
        let c = Self::speed_of_light();
        if !(carrier_frequency_hz.is_finite() && carrier_frequency_hz > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be > 0, got {carrier_frequency_hz}"
            )));
        }
        if !(ue_speed_mps >= T::zero() && ue_speed_mps < c) {
            return Err(Error::InvalidParameter(format!(
                "UE speed must lie in [0, c), got {ue_speed_mps}"
            )));
        }
        if !(snr_linear.is_finite() && snr_linear >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "SNR must be finite and >= 0, got {snr_linear}"
            )));
        }
        Ok(PropagationConfig {
            carrier_frequency_hz,
            ue_speed_mps,
            snr_linear,
            pulse: Pulse::default(),
        })
    }

    pub fn with_pulse(mut self, pulse: Pulse) -> Self {
        self.pulse = pulse;
        self
    }

    /// Same configuration with the UE at rest.
    pub fn stationary(mut self) -> Self {
        self.ue_speed_mps = T::zero();
        self
    }

    #[inline]
    pub fn speed_of_light() -> T {
        T::lit(SPEED_OF_LIGHT_MPS)
    }

    #[inline]
    pub fn carrier_frequency_hz(&self) -> T {
        self.carrier_frequency_hz
    }

    #[inline]
    pub fn ue_speed_mps(&self) -> T {
        self.ue_speed_mps
    }

    #[inline]
    pub fn snr_linear(&self) -> T {
        self.snr_linear
    }

    #[inline]
    pub fn pulse(&self) -> Pulse {
        self.pulse
    }

    /// `c / f`.
    #[inline]
    pub fn wavelength_m(&self) -> T {
        Self::speed_of_light() / self.carrier_frequency_hz
    }
}

/// BS array size, RIS size, and element spacing (in wavelengths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    pub num_bs_antennas: usize,
    pub num_ris_elements: usize,
    pub element_spacing_wavelengths: T,
}

impl<T: Scalar> ArrayGeometry<T> {
    pub fn new(num_bs_antennas: usize, num_ris_elements: usize) -> Result<Self> {
        Self::with_spacing(num_bs_antennas, num_ris_elements, T::lit(0.5))
    }

    pub fn with_spacing(num_bs_antennas: usize, num_ris_elements: usize, spacing: T) -> Result<Self> {
        let g = ArrayGeometry {
            num_bs_antennas,
            num_ris_elements,
            element_spacing_wavelengths: spacing,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bs_antennas == 0 || self.num_ris_elements == 0 {
            return Err(Error::InvalidParameter(format!(
                "array sizes must be >= 1 (M = {}, R = {})",
                self.num_bs_antennas, self.num_ris_elements
            )));
        }
        if !(self.element_spacing_wavelengths.is_finite() && self.element_spacing_wavelengths > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "element spacing must be > 0, got {}",
                self.element_spacing_wavelengths
            )));
        }
        Ok(())
    }
}

/// One resolvable propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipathComponent<T> {
    pub amplitude: Complex<T>,
    pub delay_s: T,
    pub sampling_time_s: T,
    pub cyclic_prefix_count: usize,
    pub azimuth_rad: T,
    pub elevation_rad: T,
}

impl<T: Scalar> MultipathComponent<T> {
    pub fn validate(&self) -> Result<()> {
        let two_pi = T::TAU();
        let half_pi = T::FRAC_PI_2();
        let bad = |what: &str| Err(Error::InvalidParameter(format!("multipath component: {what}")));
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return bad("amplitude must be finite");
        }
        if !(self.delay_s.is_finite() && self.delay_s >= T::zero()) {
            return bad("delay must be >= 0");
        }
        if !(self.sampling_time_s.is_finite() && self.sampling_time_s > T::zero()) {
            return bad("sampling time must be > 0");
        }
        if self.cyclic_prefix_count == 0 {
            return bad("cyclic prefix count must be >= 1");
        }
        if !(self.azimuth_rad >= T::zero() && self.azimuth_rad < two_pi) {
            return bad("azimuth must lie in [0, 2pi)");
        }
        if !(self.elevation_rad >= -half_pi && self.elevation_rad <= half_pi) {
            return bad("elevation must lie in [-pi/2, pi/2]");
        }
        Ok(())
    }

    /// Scales the complex amplitude.
    pub fn scaled(mut self, s: Complex<T>) -> Self {
        self.amplitude *= s;
        self
    }
}

/// A BS→RIS path: arrival angles at the RIS (in `path`) plus the departure
/// angles at the BS array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsRisPath<T> {
    pub path: MultipathComponent<T>,
    pub departure_azimuth_rad: T,
    pub departure_elevation_rad: T,
}

impl<T: Scalar> BsRisPath<T> {
    pub fn validate(&self) -> Result<()> {
        self.path.validate()?;
        if !(self.departure_azimuth_rad >= T::zero() && self.departure_azimuth_rad < T::TAU()) {
            return Err(Error::InvalidParameter("departure azimuth must lie in [0, 2pi)".into()));
        }
        let half_pi = T::FRAC_PI_2();
        if !(self.departure_elevation_rad >= -half_pi && self.departure_elevation_rad <= half_pi) {
            return Err(Error::InvalidParameter(
                "departure elevation must lie in [-pi/2, pi/2]".into(),
            ));
        }
        Ok(())
    }
}

/// Per-element reflection amplitude and phase of the RIS panel.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfig<T> {
    elements: Vec<(T, T)>,
}

impl<T: Scalar> RisConfig<T> {
    /// Builds a configuration from `(amplitude, phase)` pairs. Phases are
    /// wrapped into `[0, 2π)`; amplitudes must lie in `[0, 1]`.
    pub fn new(elements: Vec<(T, T)>) -> Result<Self> {
        let mut out = Vec::with_capacity(elements.len());
        for (i, (a, d)) in elements.into_iter().enumerate() {
            if !(a >= T::zero() && a <= T::one()) {
                return Err(Error::InvalidParameter(format!(
                    "RIS element {i}: reflection amplitude {a} outside [0, 1]"
                )));
            }
            if !d.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "RIS element {i}: phase must be finite"
                )));
            }
            out.push((a, wrap_phase(d)));
        }
        Ok(RisConfig { elements: out })
    }

    /// All elements switched off (`α_i = 0`).
    pub fn off(n: usize) -> Self {
        RisConfig {
            elements: vec![(T::zero(), T::zero()); n],
        }
    }

    /// Unit amplitude with the given phases.
    pub fn from_phases(phases: &[T]) -> Self {
        RisConfig {
            elements: phases.iter().map(|&d| (T::one(), wrap_phase(d))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[(T, T)] {
        &self.elements
    }

    pub fn phases(&self) -> impl Iterator<Item = T> + '_ {
        self.elements.iter().map(|e| e.1)
    }

    /// Reflection coefficient `α_i e^{jδ_i}` of each element.
    pub fn coefficients(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.elements.iter().map(|&(a, d)| Complex::from_polar(a, d))
    }
}

/// Wraps a phase into `[0, 2π)`.
pub fn wrap_phase<T: Scalar>(d: T) -> T {
    let two_pi = T::TAU();
    let mut w = d % two_pi;
    if w < T::zero() {
        w += two_pi;
    }
    // -tiny % 2π + 2π rounds to 2π
    if w >= two_pi {
        w = T::zero();
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagation_config_rejects_bad_values() {
        assert!(PropagationConfig::<f64>::new(0.0, 1.0, 1.0).is_err());
        assert!(PropagationConfig::<f64>::new(1e9, -1.0, 1.0).is_err());
        assert!(PropagationConfig::<f64>::new(1e9, SPEED_OF_LIGHT_MPS, 1.0).is_err());
        assert!(PropagationConfig::<f64>::new(1e9, 1.0, -1.0).is_err());
        assert!(PropagationConfig::<f64>::new(28e9, 20.0, 1.0).is_ok());
    }

    #[test]
    fn wavelength_is_c_over_f() {
        let cfg = PropagationConfig::<f64>::new(SPEED_OF_LIGHT_MPS, 0.0, 1.0).unwrap();
        assert_eq!(cfg.wavelength_m(), 1.0);
        let cfg = PropagationConfig::<f64>::new(28e9, 0.0, 1.0).unwrap();
        assert_eq!(cfg.wavelength_m(), SPEED_OF_LIGHT_MPS / 28e9);
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::<f64>::new(0, 4).is_err());
        assert!(ArrayGeometry::<f64>::new(4, 0).is_err());
        assert!(ArrayGeometry::<f64>::with_spacing(4, 4, 0.0).is_err());
        assert_eq!(
            ArrayGeometry::<f64>::new(2, 3).unwrap().element_spacing_wavelengths,
            0.5
        );
    }

    #[test]
    fn ris_config_amplitude_range() {
        assert!(RisConfig::<f64>::new(vec![(1.5, 0.0)]).is_err());
        assert!(RisConfig::<f64>::new(vec![(-0.1, 0.0)]).is_err());
        let r = RisConfig::<f64>::new(vec![(0.5, -std::f64::consts::FRAC_PI_2)]).unwrap();
        let d = r.elements()[0].1;
        assert!((d - 1.5 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn pulse_shapes() {
        assert_eq!(Pulse::Sinc.eval(0.0_f64, 1.0), 1.0);
        assert!(Pulse::Sinc.eval(1.0_f64, 1.0).abs() < 1e-15);
        assert!((Pulse::Sinc.eval(0.5_f64, 1.0) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(Pulse::Rect.eval(0.4_f64, 1.0), 1.0);
        assert_eq!(Pulse::Rect.eval(0.6_f64, 1.0), 0.0);
        assert_eq!(Pulse::Flat.eval(123.0_f64, 1.0), 1.0);
    }

    #[test]
    fn multipath_validation() {
        let ok = MultipathComponent {
            amplitude: Complex::new(1.0_f64, 0.0),
            delay_s: 0.0,
            sampling_time_s: 1e-6,
            cyclic_prefix_count: 1,
            azimuth_rad: 0.0,
            elevation_rad: 0.0,
        };
        assert!(ok.validate().is_ok());
        assert!(MultipathComponent { delay_s: -1.0, ..ok }.validate().is_err());
        assert!(MultipathComponent {
            sampling_time_s: 0.0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(MultipathComponent {
            cyclic_prefix_count: 0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(MultipathComponent {
            azimuth_rad: std::f64::consts::TAU,
            ..ok
        }
        .validate()
        .is_err());
        assert!(MultipathComponent {
            elevation_rad: 2.0,
            ..ok
        }
        .validate()
        .is_err());
    }
}
