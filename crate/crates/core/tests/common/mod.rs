//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use timelens::units::{Chirp, FS2};
use timelens::{AngularFrequency, EscortPulse, GaussianJsa, LensConfig, PhasematchingModel, SpectralWidth};

pub const SIGMA1: f64 = 4.9095e12;
pub const SIGMA_H: f64 = 5.4253e12;
pub const SIGMA_E: f64 = 7.38e12;
pub const RHO: f64 = -0.9776;
pub const A1_FS2: f64 = 696e3;
pub const AE_FS2: f64 = -344e3;
pub const OMEGA_1: f64 = 2.322_611_136e15;
pub const OMEGA_H: f64 = 2.544_807_939e15;
pub const OMEGA_E: f64 = 2.431_773_260e15;

/// Exact output moments of the Gaussian model, obtained by integrating the
/// quadratic exponent over ω1 with complex coefficients.
#[derive(Debug, Clone, Copy)]
pub struct ExactOutput {
    /// Mean detunings of (ω3 - ω01 - ω0e, ωh - ω0h).
    pub mean: [f64; 2],
    pub sigma3: f64,
    pub sigma_hf: f64,
    pub rho_f: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub s1: f64,
    pub sh: f64,
    pub se: f64,
    pub rho: f64,
    pub a1: f64,
    pub ae: f64,
    pub tau: f64,
    /// Phasematching width and centre offset from ω01 + ω0e.
    pub pm: Option<(f64, f64)>,
}

impl Params {
    pub fn experimental() -> Self {
        Params {
            s1: SIGMA1,
            sh: SIGMA_H,
            se: SIGMA_E,
            rho: RHO,
            a1: A1_FS2 * FS2,
            ae: AE_FS2 * FS2,
            tau: 0.0,
            pm: None,
        }
    }

    pub fn input(&self) -> GaussianJsa {
        GaussianJsa::new(
            AngularFrequency(OMEGA_1),
            AngularFrequency(OMEGA_H),
            SpectralWidth(self.s1),
            SpectralWidth(self.sh),
            self.rho,
        )
        .unwrap()
        .with_delay(self.tau)
    }

    pub fn lens(&self) -> LensConfig {
        let escort = EscortPulse::new(AngularFrequency(OMEGA_E), SpectralWidth(self.se), Chirp(self.ae)).unwrap();
        let pm = match self.pm {
            None => PhasematchingModel::Infinite,
            Some((w, c)) => {
                PhasematchingModel::gaussian(SpectralWidth(w), AngularFrequency(OMEGA_1 + OMEGA_E + c)).unwrap()
            }
        };
        LensConfig::new(Chirp(self.a1), escort, pm)
    }

    pub fn exact(&self) -> ExactOutput {
        let q = 1.0 - self.rho * self.rho;
        let i = Complex64::i();
        let k = Complex64::new(1.0 / (4.0 * self.se * self.se), 0.0) - i * self.ae;
        let a = Complex64::new(1.0 / (4.0 * self.s1 * self.s1 * q), 0.0) - i * self.a1 + k;
        let bz = -k;
        let by = Complex64::new(-self.rho / (4.0 * self.s1 * self.sh * q), 0.0);
        let b0 = i * (self.tau / 2.0);
        let (mut czz, mut lz) = (k, 0.0);
        if let Some((w, c)) = self.pm {
            czz += 1.0 / (4.0 * w * w);
            lz = c / (2.0 * w * w);
        }
        let cyy = 1.0 / (4.0 * self.sh * self.sh * q);
        let q11 = bz * bz / a - czz;
        let q12 = bz * by / a;
        let q22 = by * by / a - cyy;
        let l1 = 2.0 * bz * b0 / a + lz;
        let l2 = 2.0 * by * b0 / a;
        let p = [[-4.0 * q11.re, -4.0 * q12.re], [-4.0 * q12.re, -4.0 * q22.re]];
        let h = [2.0 * l1.re, 2.0 * l2.re];
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        let c = [[p[1][1] / det, -p[0][1] / det], [-p[1][0] / det, p[0][0] / det]];
        let mean = [c[0][0] * h[0] + c[0][1] * h[1], c[1][0] * h[0] + c[1][1] * h[1]];
        ExactOutput {
            mean,
            sigma3: c[0][0].sqrt(),
            sigma_hf: c[1][1].sqrt(),
            rho_f: c[0][1] / (c[0][0] * c[1][1]).sqrt(),
        }
    }

    /// Centre slopes dω/dτ by central difference of the exact means.
    pub fn exact_slopes(&self) -> [f64; 2] {
        let d = 1e-13;
        let up = Params { tau: d, ..*self }.exact().mean;
        let dn = Params { tau: -d, ..*self }.exact().mean;
        [(up[0] - dn[0]) / (2.0 * d), (up[1] - dn[1]) / (2.0 * d)]
    }
}

/// rad/s per s → THz/ps.
pub fn thz_per_ps(slope: f64) -> f64 {
    slope / (2.0 * std::f64::consts::PI) * 1e-24
}

/// Noiseless binned Gaussian joint spectrum: `background + peak·exp(-Q/2)`
/// sampled at bin centres, axes spanning ±`half_span` FWHM.
pub fn synthetic_spectrum(
    center: [f64; 2],
    fwhm: [f64; 2],
    rho: f64,
    background: f64,
    peak: f64,
    bins: usize,
    half_span: f64,
) -> timelens::analysis::Spectrum2D {
    let axis = |c: f64, w: f64| -> Vec<f64> {
        let step = 2.0 * half_span * w / (bins - 1) as f64;
        (0..bins).map(|i| c - half_span * w + i as f64 * step).collect()
    };
    let (l1, lh) = (axis(center[0], fwhm[0]), axis(center[1], fwhm[1]));
    let k = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt();
    let (s1, sh) = (fwhm[0] / k, fwhm[1] / k);
    let q = 1.0 - rho * rho;
    let counts = ndarray::Array2::from_shape_fn((bins, bins), |(i, j)| {
        let u = (l1[i] - center[0]) / s1;
        let v = (lh[j] - center[1]) / sh;
        background + peak * (-(u * u - 2.0 * rho * u * v + v * v) / (2.0 * q)).exp()
    });
    timelens::analysis::Spectrum2D::new(l1, lh, counts).unwrap()
}
