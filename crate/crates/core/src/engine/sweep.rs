use rayon::prelude::*;

use super::grid::{sample_jsa, GridField2D, GridPlan, GridSpec};
use super::sfg::{sfg_convolve, ConvolutionMethod, SfgOutput};
use super::stats::compute_moments;
use crate::error::{Error, Result};
use crate::gaussian::GaussianJsa;
use crate::lens::LensConfig;

/// Rows converting less than this fraction of the best row are flagged as
/// outside the temporal aperture.
pub const APERTURE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineOptions {
    pub grid: GridSpec,
    pub method: ConvolutionMethod,
}

/// One lens pass on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub plan: GridPlan,
    /// Chirped, delayed input.
    pub input: GridField2D,
    pub output: SfgOutput,
}

/// Samples `input` with the lens' signal chirp and upconverts it at the
/// input's delay.
pub fn simulate(cfg: &LensConfig, input: &GaussianJsa, opts: EngineOptions) -> Result<Simulation> {
    let state = cfg.chirped_input(input);
    let plan = GridPlan::new(&state, &cfg.escort, &cfg.phasematching, &[], opts.grid)?;
    // The delay is applied inside the convolution; sample without it.
    let field = sample_jsa(&state.with_delay(0.0), &plan.signal, &plan.herald)?;
    let output = sfg_convolve(&field, &cfg.escort, &cfg.phasematching, state.delay, &plan.output, opts.method)?;
    let input_field = if state.delay == 0.0 { field } else { sample_jsa(&state, &plan.signal, &plan.herald)? };
    Ok(Simulation { plan, input: input_field, output })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub omega03: f64,
    pub omega0h: f64,
    pub sigma3: f64,
    pub sigma_hf: f64,
    pub rho_f: f64,
    pub weight: f64,
    pub aperture_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Unweighted least squares. None for fewer than two distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len()) as f64;
    if n < 2.0 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some(LinearFit { slope, intercept: my - slope * mx })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub plan: GridPlan,
    pub rows: Vec<SweepRow>,
    /// dω03/dτ in rad/s per s.
    pub signal: Option<LinearFit>,
    /// dω0h/dτ in rad/s per s.
    pub herald: Option<LinearFit>,
}

impl SweepResult {
    pub fn any_aperture_warning(&self) -> bool {
        self.rows.iter().any(|r| r.aperture_warning)
    }
}

/// Output centres, widths and correlation at each delay, with regression
/// slopes of the centres. Every delay shares one grid plan.
pub fn delay_sweep(cfg: &LensConfig, input: &GaussianJsa, taus: &[f64], opts: EngineOptions) -> Result<SweepResult> {
    if taus.is_empty() {
        return Err(Error::Domain("delay sweep needs at least one delay".into()));
    }
    let state = cfg.chirped_input(input).with_delay(0.0);
    let plan = GridPlan::new(&state, &cfg.escort, &cfg.phasematching, taus, opts.grid)?;
    let field = sample_jsa(&state, &plan.signal, &plan.herald)?;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let out = sfg_convolve(&field, &cfg.escort, &cfg.phasematching, tau, &plan.output, opts.method)?;
            let m = compute_moments(&out.field)?;
            Ok(SweepRow {
                tau,
                omega03: m.means[0],
                omega0h: m.means[1],
                sigma3: m.sigmas[0],
                sigma_hf: m.sigmas[1],
                rho_f: m.rho,
                weight: out.weight,
                aperture_warning: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = rows.iter().fold(0.0f64, |m, r| m.max(r.weight));
    let rows: Vec<SweepRow> = rows
        .into_iter()
        .map(|r| SweepRow { aperture_warning: r.weight < APERTURE_THRESHOLD * peak, ..r })
        .collect();
    let t: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    // Regress detunings from the first row to keep precision.
    let (c3, ch) = (rows[0].omega03, rows[0].omega0h);
    let fit = |y: Vec<f64>, c: f64| linear_fit(&t, &y).map(|f| LinearFit { slope: f.slope, intercept: f.intercept + c });
    let signal = fit(rows.iter().map(|r| r.omega03 - c3).collect(), c3);
    let herald = fit(rows.iter().map(|r| r.omega0h - ch).collect(), ch);
    Ok(SweepResult { plan, rows, signal, herald })
}

/// Evenly spaced delays from `start` to `stop` inclusive.
pub fn delay_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Domain(format!("bad delay range {start:e}..{stop:e} step {step:e}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}
