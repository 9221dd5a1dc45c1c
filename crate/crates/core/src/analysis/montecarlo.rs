use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::fit::{fit_from, fit_gaussian_2d, GaussianFit};
use super::report::{deconvolve_resolution, JointSpectrumParams, ResolutionModel};
use super::spectrum::Spectrum2D;
use crate::error::{Error, Result};

pub const DEFAULT_TRIALS: usize = 500;
pub const MIN_TRIALS: usize = 100;
/// Above this fraction of failed refits the error bars are flagged.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Standard deviations over Poisson-resampled refits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBars {
    pub trials: usize,
    pub failures: usize,
    pub background: f64,
    pub amplitude: f64,
    pub center_nm: [f64; 2],
    pub fwhm_nm: [f64; 2],
    pub rho: f64,
    pub fwhm_thz: [f64; 2],
    pub deconvolved_fwhm_nm: [f64; 2],
    pub deconvolved_fwhm_thz: [f64; 2],
    pub deconvolved_rho: f64,
    pub schmidt_k: f64,
    pub deconvolved_schmidt_k: f64,
    pub joint_energy_uncertainty_thz: f64,
    pub deconvolved_joint_energy_uncertainty_thz: f64,
}

impl ErrorBars {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// False when more than [`MAX_FAILURE_RATE`] of the refits failed.
    pub fn quality_ok(&self) -> bool {
        self.failure_rate() <= MAX_FAILURE_RATE
    }
}

const N_QUANTITIES: usize = 18;

fn quantities(fit: &GaussianFit, res: &ResolutionModel) -> Result<[f64; N_QUANTITIES]> {
    let raw = JointSpectrumParams::from_fit(fit);
    let dec = deconvolve_resolution(&raw, res)?;
    let (rt, dt) = (raw.fwhm_thz()?, dec.fwhm_thz()?);
    Ok([
        fit.background,
        fit.amplitude,
        raw.center_nm[0],
        raw.center_nm[1],
        raw.fwhm_nm[0],
        raw.fwhm_nm[1],
        raw.rho,
        rt[0],
        rt[1],
        dec.fwhm_nm[0],
        dec.fwhm_nm[1],
        dt[0],
        dt[1],
        dec.rho,
        raw.joint_energy_uncertainty_thz()?,
        dec.joint_energy_uncertainty_thz()?,
        raw.schmidt_k()?,
        dec.schmidt_k()?,
    ])
}

/// Resamples every bin from a Poisson law with the observed count as mean,
/// refits, and reports per-quantity standard deviations. Trial `i` draws
/// from stream `i` of a ChaCha generator seeded with `seed`, so results do
/// not depend on the thread count.
pub fn montecarlo_errorbars(spec: &Spectrum2D, n_trials: usize, seed: u64, res: &ResolutionModel) -> Result<ErrorBars> {
    if n_trials < MIN_TRIALS {
        return Err(Error::Domain(format!("Monte Carlo needs at least {MIN_TRIALS} trials, got {n_trials}")));
    }
    let base = fit_gaussian_2d(spec)?;
    let samples: Vec<Option<[f64; N_QUANTITIES]>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let counts = spec.counts.mapv(|c| match Poisson::new(c) {
                Ok(p) => p.sample(&mut rng),
                Err(_) => 0.0,
            });
            let trial = Spectrum2D { counts, ..spec.clone() };
            fit_from(&trial, Some(&base)).ok().and_then(|f| quantities(&f, res).ok())
        })
        .collect();
    let ok: Vec<[f64; N_QUANTITIES]> = samples.iter().flatten().copied().collect();
    if ok.len() < 2 {
        return Err(Error::Degenerate("fewer than two Monte Carlo refits succeeded".into()));
    }
    let mut sd = [0.0; N_QUANTITIES];
    for (k, s) in sd.iter_mut().enumerate() {
        let mean = ok.iter().map(|q| q[k]).sum::<f64>() / ok.len() as f64;
        let var = ok.iter().map(|q| (q[k] - mean).powi(2)).sum::<f64>() / (ok.len() - 1) as f64;
        *s = var.sqrt();
    }
    Ok(ErrorBars {
        trials: n_trials,
        failures: n_trials - ok.len(),
        background: sd[0],
        amplitude: sd[1],
        center_nm: [sd[2], sd[3]],
        fwhm_nm: [sd[4], sd[5]],
        rho: sd[6],
        fwhm_thz: [sd[7], sd[8]],
        deconvolved_fwhm_nm: [sd[9], sd[10]],
        deconvolved_fwhm_thz: [sd[11], sd[12]],
        deconvolved_rho: sd[13],
        schmidt_k: sd[16],
        deconvolved_schmidt_k: sd[17],
        joint_energy_uncertainty_thz: sd[14],
        deconvolved_joint_energy_uncertainty_thz: sd[15],
    })
}
