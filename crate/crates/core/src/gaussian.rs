//! Closed-form Gaussian description of the photon pair and the escort pulse.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{AngularFrequency, Chirp, SpectralWidth, FWHM_PER_SIGMA};

/// Default rejection threshold for |ρ|. Several closed forms divide by 1-ρ².
pub const RHO_GUARD: f64 = 0.9999;

/// Two-photon joint spectral amplitude with Gaussian intensity marginals,
/// optionally carrying a quadratic (chirp) and linear (delay) phase on the
/// signal photon.
///
/// ```text
/// F(ω1, ωh) = N exp[(-x²/4σ1² - y²/4σh² + ρxy/2σ1σh) / (1-ρ²)] exp[iA1x² - iτx]
/// x = ω1 - ω01,  y = ωh - ω0h,  N = (2π σ1 σh √(1-ρ²))^(-1/2)
/// ```
///
/// ρ is the Pearson correlation of |F|². The delay phase is referenced to the
/// signal carrier, so the constant factor exp(-iω01τ) is dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianJsa {
    pub signal_center: AngularFrequency,
    pub herald_center: AngularFrequency,
    pub signal_width: SpectralWidth,
    pub herald_width: SpectralWidth,
    pub rho: f64,
    pub chirp: Chirp,
    pub delay: f64,
}

impl GaussianJsa {
    /// Phase-free state. Rejects non-positive widths and |ρ| > [`RHO_GUARD`].
    pub fn new(
        signal_center: AngularFrequency,
        herald_center: AngularFrequency,
        signal_width: SpectralWidth,
        herald_width: SpectralWidth,
        rho: f64,
    ) -> Result<Self> {
        Self::with_guard(signal_center, herald_center, signal_width, herald_width, rho, RHO_GUARD)
    }

    pub fn with_guard(
        signal_center: AngularFrequency,
        herald_center: AngularFrequency,
        signal_width: SpectralWidth,
        herald_width: SpectralWidth,
        rho: f64,
        guard: f64,
    ) -> Result<Self> {
        if !(signal_width.0 > 0.0) || !(herald_width.0 > 0.0) {
            return Err(Error::Domain(format!(
                "JSA widths must be positive (σ1 = {:e}, σh = {:e})",
                signal_width.0, herald_width.0
            )));
        }
        check_rho(rho, guard)?;
        Ok(GaussianJsa {
            signal_center,
            herald_center,
            signal_width,
            herald_width,
            rho,
            chirp: Chirp(0.0),
            delay: 0.0,
        })
    }

    pub fn with_chirp(mut self, chirp: Chirp) -> Self {
        self.chirp = chirp;
        self
    }

    pub fn with_delay(mut self, delay: f64) -> Self {
        self.delay = delay;
        self
    }

    /// Same state without chirp and delay.
    pub fn phase_free(self) -> Self {
        self.with_chirp(Chirp(0.0)).with_delay(0.0)
    }

    /// 1 - ρ².
    pub fn purity_factor(&self) -> f64 {
        1.0 - self.rho * self.rho
    }

    /// Amplitude at the peak, (2π σ1 σh √(1-ρ²))^(-1/2).
    pub fn peak_amplitude(&self) -> f64 {
        1.0 / (2.0 * PI * self.signal_width.0 * self.herald_width.0 * self.purity_factor().sqrt()).sqrt()
    }

    /// Complex amplitude at absolute angular frequencies (ω1, ωh).
    pub fn amplitude(&self, omega1: f64, omega_h: f64) -> Complex64 {
        self.amplitude_detuned(omega1 - self.signal_center.0, omega_h - self.herald_center.0)
    }

    /// Complex amplitude at detunings x = ω1-ω01, y = ωh-ω0h.
    pub fn amplitude_detuned(&self, x: f64, y: f64) -> Complex64 {
        let s1 = self.signal_width.0;
        let sh = self.herald_width.0;
        let q = self.purity_factor();
        let re = (-x * x / (4.0 * s1 * s1) - y * y / (4.0 * sh * sh) + self.rho * x * y / (2.0 * s1 * sh)) / q;
        let phase = self.chirp.0 * x * x - self.delay * x;
        Complex64::from_polar(self.peak_amplitude() * re.exp(), phase)
    }

    /// Pearson correlation of the joint intensity. Phases do not enter.
    pub fn statistical_correlation(&self) -> f64 {
        self.rho
    }

    pub fn schmidt_number(&self) -> Result<f64> {
        schmidt_number(self.rho)
    }

    /// 1/√e half-width of the signal's temporal marginal after the chirp.
    pub fn chirped_temporal_width(&self) -> Result<f64> {
        chirped_temporal_width(self.signal_width, self.rho, self.chirp)
    }
}

/// Free function form of [`GaussianJsa::amplitude`].
pub fn jsa_amplitude(state: &GaussianJsa, omega1: f64, omega_h: f64) -> Complex64 {
    state.amplitude(omega1, omega_h)
}

pub(crate) fn check_rho(rho: f64, guard: f64) -> Result<()> {
    if !rho.is_finite() || rho.abs() >= 1.0 || rho.abs() > guard {
        return Err(Error::Domain(format!("|ρ| must be < {guard} (and < 1), got {rho}")));
    }
    Ok(())
}

/// K = (1-ρ²)^(-1/2), valid for pure Gaussian states without joint phases.
pub fn schmidt_number(rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::Domain(format!("Schmidt number needs |ρ| < 1, got {rho}")));
    }
    Ok(1.0 / (1.0 - rho * rho).sqrt())
}

/// √(1 + 16A1²(1-ρ²)σ1⁴) / (2√(1-ρ²)σ1).
///
/// This is the standard deviation of the signal's temporal intensity marginal:
/// each herald-conditioned slice is a pulse of spectral width √(1-ρ²)σ1
/// stretched by the chirp, and the slices are spread by the group delay 2A1
/// times their centre detuning.
pub fn chirped_temporal_width(sigma1: SpectralWidth, rho: f64, chirp: Chirp) -> Result<f64> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::Domain(format!("temporal width needs |ρ| < 1, got {rho}")));
    }
    let q = 1.0 - rho * rho;
    let s1 = sigma1.0;
    let a = chirp.0;
    Ok((1.0 + 16.0 * a * a * q * s1.powi(4)).sqrt() / (2.0 * q.sqrt() * s1))
}

/// FWHM along the minor axis of the joint intensity ellipse.
///
/// Widths are intensity standard deviations in any frequency unit; the
/// result is in the same unit.
pub fn joint_energy_uncertainty(sigma1: f64, sigma_h: f64, rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::Domain(format!("joint energy uncertainty needs |ρ| < 1, got {rho}")));
    }
    if !(sigma1 >= 0.0) || !(sigma_h >= 0.0) {
        return Err(Error::Domain("widths must be >= 0".into()));
    }
    let a = sigma1 * sigma1;
    let b = sigma_h * sigma_h;
    let c = rho * sigma1 * sigma_h;
    let lambda_min = 0.5 * (a + b - ((a - b) * (a - b) + 4.0 * c * c).sqrt());
    Ok(FWHM_PER_SIGMA * lambda_min.max(0.0).sqrt())
}

/// Chirped Gaussian escort, normalized so that ∫|G|² dω = 1:
///
/// ```text
/// G(ωe) = (2π)^(-1/4) σe^(-1/2) exp[-(ωe-ω0e)²/4σe²] exp[iAe(ωe-ω0e)²]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscortPulse {
    pub center: AngularFrequency,
    pub width: SpectralWidth,
    pub chirp: Chirp,
}

impl EscortPulse {
    pub fn new(center: AngularFrequency, width: SpectralWidth, chirp: Chirp) -> Result<Self> {
        if !(width.0 > 0.0) || !width.0.is_finite() {
            return Err(Error::Domain(format!("escort width must be positive, got {:e}", width.0)));
        }
        Ok(EscortPulse { center, width, chirp })
    }

    /// Amplitude at detuning d = ωe - ω0e.
    pub fn amplitude_detuned(&self, d: f64) -> Complex64 {
        let s = self.width.0;
        let norm = (2.0 * PI).powf(-0.25) / s.sqrt();
        Complex64::from_polar(norm * (-d * d / (4.0 * s * s)).exp(), self.chirp.0 * d * d)
    }

    pub fn amplitude(&self, omega: f64) -> Complex64 {
        self.amplitude_detuned(omega - self.center.0)
    }

    /// 1/√e half-width of the chirped escort's temporal intensity.
    pub fn chirped_duration(&self) -> f64 {
        let s = self.width.0;
        let a = self.chirp.0;
        (1.0 + 16.0 * a * a * s.powi(4)).sqrt() / (2.0 * s)
    }
}

/// Acceptance of the sum-frequency crystal as a function of the output
/// frequency only. The Gaussian variant multiplies the output amplitude by
/// exp[-(ω3-ω̄3)²/4σΦ²], so σΦ is the intensity standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhasematchingModel {
    Infinite,
    Gaussian { width: SpectralWidth, center: AngularFrequency },
}

impl PhasematchingModel {
    pub fn gaussian(width: SpectralWidth, center: AngularFrequency) -> Result<Self> {
        if !(width.0 > 0.0) {
            return Err(Error::Domain(format!("phasematching width must be positive, got {:e}", width.0)));
        }
        if width.0.is_infinite() {
            return Ok(PhasematchingModel::Infinite);
        }
        Ok(PhasematchingModel::Gaussian { width, center })
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PhasematchingModel::Infinite)
    }

    pub fn amplitude(&self, omega3: f64) -> f64 {
        match *self {
            PhasematchingModel::Infinite => 1.0,
            PhasematchingModel::Gaussian { width, center } => {
                let d = omega3 - center.0;
                (-d * d / (4.0 * width.0 * width.0)).exp()
            }
        }
    }

    pub fn width(&self) -> Option<SpectralWidth> {
        match *self {
            PhasematchingModel::Infinite => None,
            PhasematchingModel::Gaussian { width, .. } => Some(width),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::FS2;
    use approx::assert_relative_eq;

    fn state(rho: f64) -> GaussianJsa {
        GaussianJsa::new(
            AngularFrequency(2.32e15),
            AngularFrequency(2.54e15),
            SpectralWidth(4.909e12),
            SpectralWidth(5.425e12),
            rho,
        )
        .unwrap()
    }

    /// Trapezoid rule over a ±6σ box, independent of the closed form.
    fn quadrature_norm(s: &GaussianJsa, n: usize) -> f64 {
        let s1 = s.signal_width.0;
        let sh = s.herald_width.0;
        let dx = 12.0 * s1 / n as f64;
        let dy = 12.0 * sh / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = -6.0 * s1 + i as f64 * dx;
            let wx = if i == 0 || i == n { 0.5 } else { 1.0 };
            for j in 0..=n {
                let y = -6.0 * sh + j as f64 * dy;
                let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
                acc += wx * wy * s.amplitude_detuned(x, y).norm_sqr();
            }
        }
        acc * dx * dy
    }

    #[test]
    fn peak_value() {
        let s = state(-0.9776);
        let f = s.amplitude(s.signal_center.0, s.herald_center.0);
        let expect = 1.0 / (2.0 * PI * 4.909e12 * 5.425e12 * (1.0f64 - 0.9776 * 0.9776).sqrt()).sqrt();
        assert_relative_eq!(f.norm(), expect, max_relative = 1e-14);
    }

    #[test]
    fn separable_state_factorizes() {
        let s = state(0.0);
        let g = |x: f64, sig: f64| (-x * x / (4.0 * sig * sig)).exp() / (2.0 * PI * sig * sig).powf(0.25);
        for &(x, y) in &[(0.0, 0.0), (3e12, -1e12), (-7e12, 8e12)] {
            let f = s.amplitude_detuned(x, y);
            assert_relative_eq!(f.re, g(x, 4.909e12) * g(y, 5.425e12), max_relative = 1e-12);
            assert!(f.im.abs() < 1e-30);
        }
    }

    #[test]
    fn quadrature_normalization() {
        for &rho in &[0.0, 0.5, -0.9776, 0.99] {
            let s = state(rho).with_chirp(Chirp(696e3 * FS2)).with_delay(2e-12);
            assert!((quadrature_norm(&s, 1200) - 1.0).abs() < 1e-6, "rho {rho}");
        }
    }

    #[test]
    fn rho_guard() {
        let mk = |r| {
            GaussianJsa::new(AngularFrequency(1.0), AngularFrequency(1.0), SpectralWidth(1.0), SpectralWidth(1.0), r)
        };
        assert!(mk(1.0).is_err());
        assert!(mk(-0.99995).is_err());
        assert!(mk(0.9999).is_ok());
        assert!(mk(f64::NAN).is_err());
    }

    #[test]
    fn correlation_is_stored_rho() {
        assert_eq!(state(-0.9776).statistical_correlation(), -0.9776);
        assert_eq!(state(0.0).statistical_correlation(), 0.0);
    }

    #[test]
    fn schmidt_values() {
        // Measured: 4.75 ± 0.1 (input), 2.39 ± 0.06 (output), both resolution-corrected.
        assert!((schmidt_number(-0.9776).unwrap() - 4.75).abs() < 0.01);
        assert!((schmidt_number(0.909).unwrap() - 2.40).abs() < 0.01);
        assert_eq!(schmidt_number(0.0).unwrap(), 1.0);
        assert!(schmidt_number(1.0).is_err());
        assert!(schmidt_number(-1.5).is_err());
    }

    #[test]
    fn temporal_width() {
        let s1 = SpectralWidth(4.909e12);
        assert_relative_eq!(chirped_temporal_width(s1, 0.0, Chirp(0.0)).unwrap(), 1.0 / (2.0 * 4.909e12));
        let w = chirped_temporal_width(s1, -0.9776, Chirp(696e3 * FS2)).unwrap();
        assert!((w - 6.85e-12).abs() < 0.01e-12, "{w:e}");
        let mut last = 0.0;
        for k in 0..20 {
            let w = chirped_temporal_width(s1, 0.3, Chirp(k as f64 * 1e5 * FS2)).unwrap();
            assert!(w > last);
            last = w;
        }
        assert!(chirped_temporal_width(s1, 1.0, Chirp(0.0)).is_err());
    }

    fn nm_sigma_thz(fwhm_nm: f64, center_nm: f64) -> f64 {
        crate::units::bandwidth_nm_to_thz(fwhm_nm, crate::units::Wavelength::from_nm(center_nm).unwrap()).unwrap()
            / FWHM_PER_SIGMA
    }

    #[test]
    fn joint_energy_uncertainty_measured_values() {
        let raw_in = joint_energy_uncertainty(nm_sigma_thz(4.047, 811.006), nm_sigma_thz(3.733, 740.194), -0.97024)
            .unwrap();
        assert!((raw_in - 0.334).abs() < 0.002, "{raw_in}");
        let raw_out = joint_energy_uncertainty(nm_sigma_thz(0.621, 396.113), nm_sigma_thz(2.50, 740.126), 0.863)
            .unwrap();
        assert!((raw_out - 0.468).abs() < 0.002, "{raw_out}");
        assert_relative_eq!(joint_energy_uncertainty(1.3, 1.3, 0.0).unwrap(), FWHM_PER_SIGMA * 1.3, max_relative = 1e-14);
        assert!(joint_energy_uncertainty(1.0, 1.0, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn jeu_symmetries(a in 0.1f64..5.0, b in 0.1f64..5.0, r in -0.99f64..0.99) {
            let base = joint_energy_uncertainty(a, b, r).unwrap();
            proptest::prop_assert!((joint_energy_uncertainty(a, b, -r).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
            proptest::prop_assert!((joint_energy_uncertainty(b, a, r).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
        }

        #[test]
        fn phases_leave_intensity_unchanged(x in -2e13f64..2e13, y in -2e13f64..2e13, a in -1e-24f64..1e-24, t in -1e-11f64..1e-11) {
            let s = state(-0.6);
            let i0 = s.amplitude_detuned(x, y).norm_sqr();
            let i1 = s.with_chirp(Chirp(a)).with_delay(t).amplitude_detuned(x, y).norm_sqr();
            proptest::prop_assert!((i0 - i1).abs() <= 1e-12 * i0.max(1e-300));
        }
    }
}
