use std::f64::consts::{PI, SQRT_2};

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gaussian::{chirped_temporal_width, EscortPulse, GaussianJsa, PhasematchingModel};
use crate::lens::{output_sigma3, LensConfig};
use crate::units::Chirp;

pub const MIN_POINTS: usize = 16;
/// Largest axis the planner will build.
pub const MAX_POINTS: usize = 1 << 15;
/// Largest marginal mass allowed outside a grid.
pub const COVERAGE_TOLERANCE: f64 = 1e-4;
/// The temporal window π/Δω must hold this many chirped half-widths
/// (plus the delay) to keep the sampled field free of wrap-around.
pub const ALIAS_FACTOR: f64 = 3.5;
/// Minimum number of grid steps per escort or output width.
pub const POINTS_PER_WIDTH: f64 = 3.0;

/// Uniform axis `start + i*step`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub start: f64,
    pub step: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(start: f64, step: f64, n: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(Error::Domain(format!("grid step must be positive and finite, got {step:e}")));
        }
        if n < MIN_POINTS {
            return Err(Error::Domain(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        Ok(Grid1D { start, step, n })
    }

    /// Axis whose point `n/2` sits on `center`.
    pub fn centered(center: f64, step: f64, n: usize) -> Result<Self> {
        Self::new(center - (n / 2) as f64 * step, step, n)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// Reference point `n/2`; carriers and time origins are taken here.
    pub fn center(&self) -> f64 {
        self.at(self.n / 2)
    }

    /// Distance of point `i` from [`Grid1D::center`], free of cancellation.
    pub fn offset(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.step
    }

    pub fn last(&self) -> f64 {
        self.at(self.n - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.at(i))
    }

    pub fn nearest(&self, x: f64) -> Option<usize> {
        let i = ((x - self.start) / self.step).round();
        (i >= 0.0 && (i as usize) < self.n).then_some(i as usize)
    }

    /// Same centre and extent with half the step.
    pub fn refined(&self) -> Self {
        Grid1D { start: self.center() - self.n as f64 * self.step / 2.0, step: self.step / 2.0, n: 2 * self.n }
    }

    /// Edges of the Riemann cells, half a step beyond the end points.
    fn cell_bounds(&self) -> (f64, f64) {
        (self.start - 0.5 * self.step, self.last() + 0.5 * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Axes are angular frequencies in rad/s.
    Frequency,
    /// Axes are times in s, relative to the carrier reference.
    Time,
}

/// Complex field on `axis1 × axis_h`, stored row-major with the signal index
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField2D {
    pub axis1: Grid1D,
    pub axis_h: Grid1D,
    pub values: Array2<Complex64>,
    pub domain: Domain,
}

impl GridField2D {
    pub fn new(axis1: Grid1D, axis_h: Grid1D, values: Array2<Complex64>, domain: Domain) -> Result<Self> {
        if values.dim() != (axis1.n, axis_h.n) {
            return Err(Error::Domain(format!(
                "field shape {:?} does not match axes ({}, {})",
                values.dim(),
                axis1.n,
                axis_h.n
            )));
        }
        Ok(GridField2D { axis1, axis_h, values, domain })
    }

    /// Σ|F|² Δ1 Δh.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.axis1.step * self.axis_h.step
    }

    /// Scales to unit norm and returns the norm before scaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalize a field with norm {norm:e}")));
        }
        let k = 1.0 / norm.sqrt();
        self.values.mapv_inplace(|v| v * k);
        Ok(norm)
    }

    pub fn intensity(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm_sqr())
    }

    /// Marginal intensity along the signal axis, integrated over the herald.
    pub fn signal_marginal(&self) -> Vec<f64> {
        self.values.rows().into_iter().map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.axis_h.step).collect()
    }

    pub fn herald_marginal(&self) -> Vec<f64> {
        self.values
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.axis1.step)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Minimum point count per axis.
    pub n: usize,
    /// Half-span in units of the represented width.
    pub span: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 512, span: 6.0 }
    }
}

impl GridSpec {
    pub fn new(n: usize, span: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::Domain(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::Domain(format!("grid span must be positive, got {span}")));
        }
        Ok(GridSpec { n, span })
    }
}

/// Axes for one lens simulation. The signal and output axes share Δω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPlan {
    pub signal: Grid1D,
    pub herald: Grid1D,
    pub output: Grid1D,
}

impl GridPlan {
    /// Sizes the grids for `input` (with its signal chirp) sent through the
    /// lens at every delay in `delays` (the input's own delay if empty).
    ///
    /// The signal axis spans ±span·σ1 and is promoted to a power of two until
    /// the step resolves the escort and the output and the temporal window
    /// holds the chirped signal. The output axis is sized from the Φ ≡ 1
    /// width narrowed by phasematching, plus the worst-case centre shift.
    pub fn new(
        input: &GaussianJsa,
        escort: &EscortPulse,
        pm: &PhasematchingModel,
        delays: &[f64],
        spec: GridSpec,
    ) -> Result<Self> {
        let delays: Vec<f64> = if delays.is_empty() { vec![input.delay] } else { delays.to_vec() };
        let tau_max = delays.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if !tau_max.is_finite() {
            return Err(Error::Domain("delays must be finite".into()));
        }
        let s1 = input.signal_width.0;
        let sh = input.herald_width.0;
        let se = escort.width.0;
        let a1 = input.chirp.0;
        let ae = escort.chirp.0;

        let open = LensConfig::new(input.chirp, *escort, PhasematchingModel::Infinite);
        let s3_open = output_sigma3(&open, input)?.0;
        let s3 = match pm.width() {
            Some(w) => 1.0 / (1.0 / (s3_open * s3_open) + 1.0 / (w.0 * w.0)).sqrt(),
            None => s3_open,
        };

        let dt1 = chirped_temporal_width(input.signal_width, input.rho, input.chirp)?;
        let dt_comb = chirped_temporal_width(input.signal_width, input.rho, Chirp(a1 + ae))?;
        let window = (tau_max + ALIAS_FACTOR * dt1).max(tau_max + ALIAS_FACTOR * dt_comb + 2.0 * ae.abs() * 4.0 * s3);
        let max_step = (se.min(s3) / POINTS_PER_WIDTH).min(PI / window);
        let needed = (2.0 * spec.span * s1 / max_step).ceil();
        if !(needed <= MAX_POINTS as f64) {
            return Err(Error::Coverage(format!(
                "signal axis would need {needed:e} points (limit {MAX_POINTS})"
            )));
        }
        let n1 = (needed as usize).max(spec.n).next_power_of_two();
        let step = 2.0 * spec.span * s1 / n1 as f64;
        let signal = Grid1D::centered(input.signal_center.0, step, n1)?;
        let herald = Grid1D::centered(input.herald_center.0, 2.0 * spec.span * sh / spec.n as f64, spec.n)?;

        // Bound on |dω03/dτ| over all regimes.
        let mut shift_rate = 0.0;
        if a1 != 0.0 {
            shift_rate += 1.0 / a1.abs();
        }
        if ae != 0.0 {
            shift_rate += 1.0 / (2.0 * ae.abs());
        }
        let c0 = input.signal_center.0 + escort.center.0;
        let (mut lo, mut hi) = (c0 - tau_max * shift_rate, c0 + tau_max * shift_rate);
        if let PhasematchingModel::Gaussian { width, center } = pm {
            // Φ² multiplies a Gaussian marginal, pulling its centre toward Φ's.
            let w_open = 1.0 / (s3_open * s3_open);
            let w_pm = 1.0 / (width.0 * width.0);
            let pull = |c: f64| (c * w_open + center.0 * w_pm) / (w_open + w_pm);
            lo = pull(lo);
            hi = pull(hi);
        }
        let half = spec.span * s3;
        let n3 = (((hi - lo + 2.0 * half) / step).ceil() as usize + 1).max(MIN_POINTS);
        if n3 > MAX_POINTS {
            return Err(Error::Coverage(format!("output axis would need {n3} points (limit {MAX_POINTS})")));
        }
        let n3 = n3 + n3 % 2;
        let output = Grid1D::centered(0.5 * (lo + hi), step, n3)?;
        Ok(GridPlan { signal, herald, output })
    }
}

fn gaussian_tail(center: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    0.5 * erfc((center - lo) / (SQRT_2 * sigma)) + 0.5 * erfc((hi - center) / (SQRT_2 * sigma))
}

/// Samples `state` (including its chirp and delay phases) and normalizes.
///
/// Fails if either marginal leaves more than [`COVERAGE_TOLERANCE`] of its
/// mass outside the grid, or if the temporal window π/Δω cannot hold the
/// chirped, delayed signal.
pub fn sample_jsa(state: &GaussianJsa, axis1: &Grid1D, axis_h: &Grid1D) -> Result<GridField2D> {
    let (lo, hi) = axis1.cell_bounds();
    let outside1 = gaussian_tail(state.signal_center.0, state.signal_width.0, lo, hi);
    let (lo, hi) = axis_h.cell_bounds();
    let outside_h = gaussian_tail(state.herald_center.0, state.herald_width.0, lo, hi);
    if outside1 + outside_h > COVERAGE_TOLERANCE {
        return Err(Error::Coverage(format!(
            "marginal mass outside grid: signal {outside1:.2e}, herald {outside_h:.2e}"
        )));
    }
    let window = PI / axis1.step;
    let needed = state.delay.abs() + ALIAS_FACTOR * state.chirped_temporal_width()?;
    if window < needed {
        return Err(Error::Aliasing(format!(
            "temporal window ±{window:.3e} s is shorter than the chirped signal ({needed:.3e} s); reduce Δω"
        )));
    }
    let x0 = axis1.start - state.signal_center.0;
    let y0 = axis_h.start - state.herald_center.0;
    let mut values = Array2::zeros((axis1.n, axis_h.n));
    Zip::indexed(&mut values).par_for_each(|(i, j), v| {
        *v = state.amplitude_detuned(x0 + i as f64 * axis1.step, y0 + j as f64 * axis_h.step);
    });
    let mut field = GridField2D::new(*axis1, *axis_h, values, Domain::Frequency)?;
    field.normalize()?;
    Ok(field)
}
