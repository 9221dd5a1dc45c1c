//! Units and conversions shared by the rest of the crate.
//!
//! Internally every spectral quantity is an angular frequency in rad/s and
//! every width is the standard deviation σ of an *intensity* marginal (the
//! intensity falls to 1/√e at a detuning of σ). Wavelengths, ordinary
//! frequencies and FWHM values only appear at input/output boundaries.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// FWHM / σ for a Gaussian intensity profile, 2√(2 ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

pub const FS: f64 = 1e-15;
pub const PS: f64 = 1e-12;
pub const FS2: f64 = 1e-30;
pub const NM: f64 = 1e-9;
pub const THZ: f64 = 1e12;

/// Angular frequency in rad/s. Carriers are positive; detunings can take
/// either sign.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularFrequency(pub f64);

/// Standard deviation of an intensity marginal, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpectralWidth(pub f64);

/// Quadratic spectral phase coefficient A in φ(ω) = A(ω-ω0)², s².
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Chirp(pub f64);

/// Vacuum wavelength in meters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(pub f64);

impl AngularFrequency {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Ordinary frequency ω/2π in Hz.
    pub fn hz(self) -> f64 {
        self.0 / (2.0 * PI)
    }
}

impl SpectralWidth {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("spectral width must be finite and >= 0, got {sigma}")));
        }
        Ok(SpectralWidth(sigma))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// FWHM of the intensity marginal in ordinary frequency (Hz).
    pub fn fwhm_hz(self) -> f64 {
        FWHM_PER_SIGMA * self.0 / (2.0 * PI)
    }

    /// Width from an ordinary-frequency FWHM in Hz.
    pub fn from_fwhm_hz(fwhm: f64) -> Result<Self> {
        SpectralWidth::new(fwhm_to_sigma(fwhm)? * 2.0 * PI)
    }
}

impl Chirp {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn from_fs2(a: f64) -> Self {
        Chirp(a * FS2)
    }

    pub fn fs2(self) -> f64 {
        self.0 / FS2
    }
}

impl Wavelength {
    pub fn new(meters: f64) -> Result<Self> {
        if !(meters > 0.0) || !meters.is_finite() {
            return Err(Error::Domain(format!("wavelength must be positive, got {meters} m")));
        }
        Ok(Wavelength(meters))
    }

    pub fn from_nm(nm: f64) -> Result<Self> {
        Wavelength::new(nm * NM)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn nm(self) -> f64 {
        self.0 / NM
    }
}

/// 2πc/λ.
pub fn wavelength_to_angular(lambda: Wavelength) -> Result<AngularFrequency> {
    let l = Wavelength::new(lambda.0)?;
    Ok(AngularFrequency(2.0 * PI * SPEED_OF_LIGHT / l.0))
}

/// Inverse of [`wavelength_to_angular`].
pub fn wavelength_of(omega: AngularFrequency) -> Result<Wavelength> {
    if !(omega.0 > 0.0) {
        return Err(Error::Domain(format!("carrier frequency must be positive, got {} rad/s", omega.0)));
    }
    Ok(Wavelength(2.0 * PI * SPEED_OF_LIGHT / omega.0))
}

/// First-order bandwidth conversion Δν = cΔλ/λ0², returned in THz.
pub fn bandwidth_nm_to_thz(delta_nm: f64, center: Wavelength) -> Result<f64> {
    if !(center.0 > 0.0) {
        return Err(Error::Domain(format!("center wavelength must be positive, got {} m", center.0)));
    }
    if !(delta_nm >= 0.0) {
        return Err(Error::Domain(format!("bandwidth must be >= 0, got {delta_nm} nm")));
    }
    Ok(SPEED_OF_LIGHT * delta_nm * NM / (center.0 * center.0) / THZ)
}

/// Inverse first-order conversion Δλ = λ0²Δν/c, Δν in THz, result in nm.
pub fn bandwidth_thz_to_nm(delta_thz: f64, center: Wavelength) -> Result<f64> {
    if !(center.0 > 0.0) {
        return Err(Error::Domain(format!("center wavelength must be positive, got {} m", center.0)));
    }
    Ok(delta_thz * THZ * center.0 * center.0 / SPEED_OF_LIGHT / NM)
}

pub fn fwhm_to_sigma(fwhm: f64) -> Result<f64> {
    if !(fwhm >= 0.0) {
        return Err(Error::Domain(format!("FWHM must be >= 0, got {fwhm}")));
    }
    Ok(fwhm / FWHM_PER_SIGMA)
}

pub fn sigma_to_fwhm(sigma: f64) -> f64 {
    sigma * FWHM_PER_SIGMA
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    #[test]
    fn fwhm_constant_matches_definition() {
        assert_relative_eq!(FWHM_PER_SIGMA, 2.0 * (2.0 * LN_2).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(fwhm_to_sigma(2.35482).unwrap(), 1.0, max_relative = 1e-5);
    }

    #[test]
    fn carriers_from_wavelength() {
        let w = wavelength_to_angular(Wavelength::from_nm(811.006).unwrap()).unwrap();
        assert_relative_eq!(w.0, 2.322_611_136e15, max_relative = 1e-9);
        let w = wavelength_to_angular(Wavelength::from_nm(396.113).unwrap()).unwrap();
        assert_relative_eq!(w.0, 4.755_338_924e15, max_relative = 1e-9);
    }

    #[test]
    fn non_positive_wavelength_rejected() {
        assert!(matches!(Wavelength::from_nm(0.0), Err(Error::Domain(_))));
        assert!(wavelength_to_angular(Wavelength(-1.0)).is_err());
        assert!(bandwidth_nm_to_thz(1.0, Wavelength(0.0)).is_err());
        assert!(fwhm_to_sigma(-1.0).is_err());
    }

    #[test]
    fn measured_bandwidths() {
        let l = Wavelength::from_nm(811.006).unwrap();
        // Measured signal bandwidth 1.840 ± 0.003 THz.
        assert!((bandwidth_nm_to_thz(4.034, l).unwrap() - 1.840).abs() < 0.003);
        assert_eq!(bandwidth_nm_to_thz(0.0, l).unwrap(), 0.0);
        let esc = Wavelength::from_nm(774.6).unwrap();
        let thz = bandwidth_nm_to_thz(5.53, esc).unwrap();
        assert!((thz - 2.77).abs() < 0.01);
        let sigma_e = SpectralWidth::from_fwhm_hz(thz * THZ).unwrap();
        assert_relative_eq!(sigma_e.0, 7.38e12, max_relative = 2e-3);
    }

    #[test]
    fn escort_fwhm_to_sigma_chain() {
        let s = SpectralWidth::from_fwhm_hz(2.766e12).unwrap();
        assert_relative_eq!(s.0, 7.38e12, max_relative = 1e-3);
        let s1 = SpectralWidth::from_fwhm_hz(1.840e12).unwrap();
        // 4.909 is the quoted value truncated to four figures (exact 4.90953).
        assert!((s1.0 / 1e12 - 4.909).abs() < 1e-3);
        assert_relative_eq!(s1.fwhm_hz(), 1.840e12, max_relative = 1e-12);
    }

    #[test]
    fn bandwidth_conversion_is_linear() {
        let l = Wavelength::from_nm(800.0).unwrap();
        let a = bandwidth_nm_to_thz(1.0, l).unwrap();
        assert_relative_eq!(bandwidth_nm_to_thz(3.0, l).unwrap(), 3.0 * a, max_relative = 1e-14);
        let l2 = Wavelength::from_nm(400.0).unwrap();
        assert_relative_eq!(bandwidth_nm_to_thz(1.0, l2).unwrap(), 4.0 * a, max_relative = 1e-14);
        assert_relative_eq!(bandwidth_thz_to_nm(a, l).unwrap(), 1.0, max_relative = 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn wavelength_round_trip(nm in 100.0f64..5000.0) {
            let l = Wavelength::from_nm(nm).unwrap();
            let back = wavelength_of(wavelength_to_angular(l).unwrap()).unwrap();
            proptest::prop_assert!(((back.0 - l.0) / l.0).abs() < 1e-12);
        }
    }
}
