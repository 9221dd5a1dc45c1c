use super::fit::{fit_gaussian_2d, GaussianFit};
use super::montecarlo::ErrorBars;
use super::spectrum::Spectrum2D;
use crate::error::{Error, Result};
use crate::gaussian::{joint_energy_uncertainty, schmidt_number};
use crate::units::{bandwidth_nm_to_thz, Wavelength, FWHM_PER_SIGMA};

/// Gaussian spectrometer responses, given as standard deviations in nm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResolutionModel {
    pub r1: f64,
    pub rh: f64,
}

impl ResolutionModel {
    pub fn new(r1: f64, rh: f64) -> Result<Self> {
        if !(r1 >= 0.0) || !(rh >= 0.0) || !r1.is_finite() || !rh.is_finite() {
            return Err(Error::Domain(format!("resolutions must be >= 0, got {r1}, {rh}")));
        }
        Ok(ResolutionModel { r1, rh })
    }
}

/// Centres, FWHMs (nm) and correlation of a joint spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSpectrumParams {
    pub center_nm: [f64; 2],
    pub fwhm_nm: [f64; 2],
    pub rho: f64,
}

impl JointSpectrumParams {
    pub fn from_fit(fit: &GaussianFit) -> Self {
        JointSpectrumParams {
            center_nm: fit.center,
            fwhm_nm: [fit.sigma[0] * FWHM_PER_SIGMA, fit.sigma[1] * FWHM_PER_SIGMA],
            rho: fit.rho,
        }
    }

    pub fn fwhm_thz(&self) -> Result<[f64; 2]> {
        let f = |k: usize| bandwidth_nm_to_thz(self.fwhm_nm[k], Wavelength::from_nm(self.center_nm[k])?);
        Ok([f(0)?, f(1)?])
    }

    pub fn schmidt_k(&self) -> Result<f64> {
        schmidt_number(self.rho)
    }

    /// Minor-axis FWHM of the joint intensity in frequency, THz.
    pub fn joint_energy_uncertainty_thz(&self) -> Result<f64> {
        let [a, b] = self.fwhm_thz()?;
        joint_energy_uncertainty(a / FWHM_PER_SIGMA, b / FWHM_PER_SIGMA, self.rho)
    }
}

/// Removes Gaussian instrument broadening from fitted widths:
/// `FWHM_dec² = FWHM_raw² - (2√(2ln2) r)²` on each axis, keeping the
/// covariance ρσ1σh fixed.
pub fn deconvolve_resolution(raw: &JointSpectrumParams, res: &ResolutionModel) -> Result<JointSpectrumParams> {
    let res_fwhm = [res.r1 * FWHM_PER_SIGMA, res.rh * FWHM_PER_SIGMA];
    let mut dec = [0.0; 2];
    for k in 0..2 {
        let d2 = raw.fwhm_nm[k] * raw.fwhm_nm[k] - res_fwhm[k] * res_fwhm[k];
        if !(d2 > 0.0) {
            return Err(Error::Deconvolution(format!(
                "resolution FWHM {:.4} nm is not below the fitted FWHM {:.4} nm on axis {}",
                res_fwhm[k],
                raw.fwhm_nm[k],
                k + 1
            )));
        }
        dec[k] = d2.sqrt();
    }
    let rho = raw.rho * (raw.fwhm_nm[0] * raw.fwhm_nm[1]) / (dec[0] * dec[1]);
    if !(rho.abs() < 1.0) {
        return Err(Error::Deconvolution(format!(
            "deconvolved correlation {rho:.5} is unphysical; the resolutions are too large for this fit"
        )));
    }
    Ok(JointSpectrumParams { center_nm: raw.center_nm, fwhm_nm: dec, rho })
}

/// One row per quantity of a fitted joint spectrum, raw and deconvolved.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub fit: GaussianFit,
    pub raw: JointSpectrumParams,
    pub deconvolved: JointSpectrumParams,
    pub resolution: ResolutionModel,
    pub errors: Option<ErrorBars>,
}

impl FitReport {
    pub fn new(fit: GaussianFit, resolution: ResolutionModel) -> Result<Self> {
        let raw = JointSpectrumParams::from_fit(&fit);
        let deconvolved = deconvolve_resolution(&raw, &resolution)?;
        Ok(FitReport { fit, raw, deconvolved, resolution, errors: None })
    }

    pub fn from_spectrum(spec: &Spectrum2D, resolution: ResolutionModel) -> Result<Self> {
        Self::new(fit_gaussian_2d(spec)?, resolution)
    }

    pub fn offset(&self) -> f64 {
        self.fit.background
    }
}
