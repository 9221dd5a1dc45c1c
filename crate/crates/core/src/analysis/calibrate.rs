use std::cell::Cell;

use crate::engine::{delay_sweep, linear_fit, EngineOptions};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianJsa, PhasematchingModel};
use crate::lens::{output_sigma3, LensConfig};
use crate::units::{AngularFrequency, SpectralWidth};

/// Targets within this relative distance of the Φ ≡ 1 slope need no
/// phasematching restriction.
pub const OPEN_SLOPE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub engine: EngineOptions,
    /// Search bracket for σΦ as multiples of the Φ ≡ 1 output width.
    pub bracket: (f64, f64),
    /// Stop when the slope matches to this relative accuracy.
    pub tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions { engine: EngineOptions::default(), bracket: (0.05, 50.0), tolerance: 1e-6, max_evaluations: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub model: PhasematchingModel,
    /// Signal-centre slopes in rad/s per s.
    pub target_slope: f64,
    pub achieved_slope: f64,
    /// Slope with Φ ≡ 1, the largest reachable value.
    pub open_slope: f64,
    pub evaluations: usize,
}

impl Calibration {
    pub fn residual(&self) -> f64 {
        self.achieved_slope - self.target_slope
    }
}

/// Fits σΦ so that the simulated signal-centre slope matches the slope of
/// the measured `(τ, ω03)` pairs.
pub fn calibrate_phasematching(
    data: &[(f64, f64)],
    cfg: &LensConfig,
    input: &GaussianJsa,
    opts: CalibrationOptions,
) -> Result<Calibration> {
    if data.len() < 3 {
        return Err(Error::Domain(format!("calibration needs at least 3 sweep points, got {}", data.len())));
    }
    let taus: Vec<f64> = data.iter().map(|d| d.0).collect();
    let c0 = data[0].1;
    let y: Vec<f64> = data.iter().map(|d| d.1 - c0).collect();
    let fit = linear_fit(&taus, &y).ok_or_else(|| Error::Domain("sweep delays are all equal".into()))?;
    calibrate_to_slope(fit.slope, &taus, cfg, input, opts)
}

/// Root-finds σΦ (on a log scale) for a target signal-centre slope, using
/// the grid engine at the given delays.
pub fn calibrate_to_slope(
    target: f64,
    taus: &[f64],
    cfg: &LensConfig,
    input: &GaussianJsa,
    opts: CalibrationOptions,
) -> Result<Calibration> {
    if taus.len() < 3 {
        return Err(Error::Domain(format!("calibration needs at least 3 delays, got {}", taus.len())));
    }
    let center = AngularFrequency(input.signal_center.0 + cfg.escort.center.0);
    let evaluations = Cell::new(0usize);
    let slope_at = |pm: PhasematchingModel| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        let lens = LensConfig { phasematching: pm, ..*cfg };
        let sweep = delay_sweep(&lens, input, taus, opts.engine)?;
        sweep.signal.map(|f| f.slope).ok_or_else(|| Error::Domain("sweep delays are all equal".into()))
    };

    let open_slope = slope_at(PhasematchingModel::Infinite)?;
    let ratio = target / open_slope;
    let done = |model, achieved, evaluations| Calibration { model, target_slope: target, achieved_slope: achieved, open_slope, evaluations };
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::Calibration(format!(
            "target slope {target:.4e} and the unrestricted slope {open_slope:.4e} rad/s² differ in sign"
        )));
    }
    if (ratio - 1.0).abs() <= OPEN_SLOPE_TOLERANCE {
        return Ok(done(PhasematchingModel::Infinite, open_slope, evaluations.get()));
    }
    if ratio > 1.0 {
        return Err(Error::Calibration(format!(
            "target slope {target:.4e} exceeds the unrestricted slope {open_slope:.4e} rad/s²; \
             phasematching can only reduce it"
        )));
    }

    let open = LensConfig { phasematching: PhasematchingModel::Infinite, ..*cfg };
    let s3 = output_sigma3(&open, &open.chirped_input(input))?.0;
    let model = |u: f64| PhasematchingModel::gaussian(SpectralWidth(u.exp()), center);
    let (mut lo, mut hi) = ((opts.bracket.0 * s3).ln(), (opts.bracket.1 * s3).ln());
    let mut f_lo = slope_at(model(lo)?)? / open_slope - ratio;
    let mut f_hi = slope_at(model(hi)?)? / open_slope - ratio;
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Calibration(format!(
            "no σΦ in [{:.3e}, {:.3e}] rad/s reproduces the slope: relative slopes {:.4} and {:.4} at the ends, target {:.4}",
            lo.exp(),
            hi.exp(),
            f_lo + ratio,
            f_hi + ratio,
            ratio
        )));
    }
    // Illinois false position on u = ln σΦ.
    let mut side = 0i8;
    while evaluations.get() < opts.max_evaluations {
        let u = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let slope = slope_at(model(u)?)?;
        let f = slope / open_slope - ratio;
        if f.abs() <= opts.tolerance * ratio || (hi - lo) < 1e-12 {
            return Ok(done(model(u)?, slope, evaluations.get()));
        }
        if f < 0.0 {
            lo = u;
            f_lo = f;
            if side == -1 {
                f_hi /= 2.0;
            }
            side = -1;
        } else {
            hi = u;
            f_hi = f;
            if side == 1 {
                f_lo /= 2.0;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence(opts.max_evaluations))
}
