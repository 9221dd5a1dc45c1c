use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::grid::{Domain, Grid1D, GridField2D, COVERAGE_TOLERANCE};
use crate::error::{Error, Result};
use crate::gaussian::{EscortPulse, PhasematchingModel};

/// Fraction of an axis at each end that must stay essentially empty.
const EDGE_FRACTION: usize = 16;
/// Output marginal widths below this many steps are under-resolved.
const MIN_STEPS_PER_SIGMA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// Explicit sum over the signal axis for every output point.
    Direct,
    /// Zero-padded FFT convolution per herald column; same sum, O(n log n).
    #[default]
    Fft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfgOutput {
    /// Normalized upconverted field on `output × herald`.
    pub field: GridField2D,
    /// Norm before renormalization: the relative conversion weight.
    pub weight: f64,
}

/// Upconverts `field` with a chirped escort:
///
/// ```text
/// F_f(ω3, ωh) = Φ(ω3) Σ_j G(ω3 - ω1_j) F(ω1_j, ωh) exp(-i(ω1_j - ω_ref)τ) Δω
/// ```
///
/// `output` must share the signal step. The result is renormalized and
/// checked for mass at the output edges and for under-resolved marginals.
pub fn sfg_convolve(
    field: &GridField2D,
    escort: &EscortPulse,
    pm: &PhasematchingModel,
    tau: f64,
    output: &Grid1D,
    method: ConvolutionMethod,
) -> Result<SfgOutput> {
    if field.domain != Domain::Frequency {
        return Err(Error::Unsupported("sfg_convolve needs a frequency-domain field".into()));
    }
    let step = field.axis1.step;
    if (output.step - step).abs() > 1e-12 * step {
        return Err(Error::StepMismatch(step, output.step));
    }
    let (n1, nh) = field.values.dim();
    let n3 = output.n;

    let delayed: Vec<Complex64> = (0..n1).map(|j| Complex64::from_polar(1.0, -field.axis1.offset(j) * tau)).collect();
    // Escort detuning for (k, j) is d0 + (k - j)Δω.
    let d0 = output.start - field.axis1.start - escort.center.0;
    let kernel: Vec<Complex64> =
        (0..n1 + n3 - 1).map(|p| escort.amplitude_detuned(d0 + (p as f64 - (n1 - 1) as f64) * step)).collect();
    let pm_row: Vec<f64> = (0..n3).map(|k| pm.amplitude(output.at(k)) * step).collect();

    let mut values = Array2::<Complex64>::zeros((n3, nh));
    match method {
        ConvolutionMethod::Direct => {
            values.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(k, mut row)| {
                for j in 0..n1 {
                    let g = kernel[k + n1 - 1 - j] * delayed[j];
                    for (o, &f) in row.iter_mut().zip(field.values.row(j)) {
                        *o += g * f;
                    }
                }
                row.mapv_inplace(|v| v * pm_row[k]);
            });
        }
        ConvolutionMethod::Fft => {
            let len = (n1 + n3 - 1).next_power_of_two();
            let mut planner = FftPlanner::<f64>::new();
            let fwd = planner.plan_fft_forward(len);
            let inv = planner.plan_fft_inverse(len);
            let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
            spectrum[..kernel.len()].copy_from_slice(&kernel);
            fwd.process(&mut spectrum);
            let scale = 1.0 / len as f64;
            let columns: Vec<Vec<Complex64>> = (0..nh)
                .into_par_iter()
                .map(|h| {
                    let mut buf = vec![Complex64::new(0.0, 0.0); len];
                    for j in 0..n1 {
                        buf[j] = field.values[(j, h)] * delayed[j];
                    }
                    fwd.process(&mut buf);
                    for (b, s) in buf.iter_mut().zip(&spectrum) {
                        *b *= s * scale;
                    }
                    inv.process(&mut buf);
                    (0..n3).map(|k| buf[k + n1 - 1] * pm_row[k]).collect()
                })
                .collect();
            for (h, col) in columns.into_iter().enumerate() {
                for (k, v) in col.into_iter().enumerate() {
                    values[(k, h)] = v;
                }
            }
        }
    }

    let mut out = GridField2D::new(*output, field.axis_h, values, Domain::Frequency)?;
    let weight = out.normalize().map_err(|_| Error::Degenerate(format!("no conversion at delay {tau:e} s")))?;
    check_edges(&out.signal_marginal(), output, "output")?;
    check_edges(&out.herald_marginal(), &field.axis_h, "herald")?;
    Ok(SfgOutput { field: out, weight })
}

fn check_edges(marginal: &[f64], axis: &Grid1D, name: &str) -> Result<()> {
    let edge = (marginal.len() / EDGE_FRACTION).max(1);
    let total: f64 = marginal.iter().sum();
    let outer: f64 = marginal[..edge].iter().chain(&marginal[marginal.len() - edge..]).sum();
    if outer > COVERAGE_TOLERANCE * total {
        return Err(Error::Coverage(format!(
            "{name} axis edges hold {:.2e} of the converted intensity",
            outer / total
        )));
    }
    let mean = marginal.iter().enumerate().map(|(i, m)| i as f64 * m).sum::<f64>() / total;
    let var = marginal.iter().enumerate().map(|(i, m)| (i as f64 - mean).powi(2) * m).sum::<f64>() / total;
    if var.sqrt() < MIN_STEPS_PER_SIGMA {
        return Err(Error::Aliasing(format!(
            "{name} marginal spans only {:.2} steps of {:.3e} rad/s",
            var.sqrt(),
            axis.step
        )));
    }
    Ok(())
}
