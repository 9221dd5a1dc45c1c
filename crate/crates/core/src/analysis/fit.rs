use nalgebra::{SMatrix, SVector};

use super::spectrum::Spectrum2D;
use crate::error::{Error, Result};

type Vec7 = SVector<f64, 7>;
type Mat7 = SMatrix<f64, 7, 7>;

pub const MAX_ITERATIONS: usize = 200;
/// Convergence threshold on the step, measured in natural units: data
/// maximum for offset and amplitude, widths for centres, and the raw values
/// of the log-widths and atanh ρ.
pub const STEP_TOLERANCE: f64 = 1e-10;
pub const MIN_BINS: usize = 6;

/// Least-squares fit of `B + A exp(-Q/2)` with
/// `Q = (u² - 2ρuv + v²)/(1-ρ²)`, `u = (λ1-c1)/σ1`, `v = (λh-ch)/σh`.
/// Widths are intensity standard deviations in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit {
    pub background: f64,
    pub amplitude: f64,
    pub center: [f64; 2],
    pub sigma: [f64; 2],
    pub rho: f64,
    pub iterations: usize,
    /// Sum of squared residuals in count units.
    pub cost: f64,
}

impl GaussianFit {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let u = (x - self.center[0]) / self.sigma[0];
        let v = (y - self.center[1]) / self.sigma[1];
        let q = 1.0 - self.rho * self.rho;
        self.background + self.amplitude * (-(u * u - 2.0 * self.rho * u * v + v * v) / (2.0 * q)).exp()
    }

    fn params(&self, scale: f64) -> Vec7 {
        Vec7::from([
            self.background / scale,
            self.amplitude / scale,
            self.center[0],
            self.center[1],
            self.sigma[0].ln(),
            self.sigma[1].ln(),
            self.rho.atanh(),
        ])
    }

    fn from_params(p: &Vec7, scale: f64, iterations: usize, cost: f64) -> Self {
        GaussianFit {
            background: p[0] * scale,
            amplitude: p[1] * scale,
            center: [p[2], p[3]],
            sigma: [p[4].exp(), p[5].exp()],
            rho: p[6].tanh(),
            iterations,
            cost: cost * scale * scale,
        }
    }
}

/// Residuals and Jacobian rows for parameters
/// `[B, A, c1, ch, ln σ1, ln σh, atanh ρ]`; returns (JᵀJ, Jᵀr, Σr²).
fn normal_equations(spec: &Spectrum2D, data_scale: f64, p: &Vec7) -> (Mat7, Vec7, f64) {
    let (sx, sy, rho) = (p[4].exp(), p[5].exp(), p[6].tanh());
    let q = 1.0 - rho * rho;
    let mut jtj = Mat7::zeros();
    let mut jtr = Vec7::zeros();
    let mut cost = 0.0;
    for (i, &x) in spec.lambda1.iter().enumerate() {
        let u = (x - p[2]) / sx;
        for (j, &y) in spec.lambda_h.iter().enumerate() {
            let v = (y - p[3]) / sy;
            let quad = (u * u - 2.0 * rho * u * v + v * v) / q;
            let e = (-0.5 * quad).exp();
            let g = p[1] * e;
            let r = p[0] + g - spec.counts[(i, j)] / data_scale;
            let dq_du = 2.0 * (u - rho * v) / q;
            let dq_dv = 2.0 * (v - rho * u) / q;
            let dq_drho = -2.0 * u * v / q + quad * 2.0 * rho / q;
            let row = Vec7::from([
                1.0,
                e,
                -0.5 * g * dq_du * (-1.0 / sx),
                -0.5 * g * dq_dv * (-1.0 / sy),
                -0.5 * g * dq_du * (-u),
                -0.5 * g * dq_dv * (-v),
                -0.5 * g * dq_drho * q,
            ]);
            jtj += row * row.transpose();
            jtr += row * r;
            cost += r * r;
        }
    }
    (jtj, jtr, cost)
}

/// Moment estimates from the histogram above its border level.
fn initial_guess(spec: &Spectrum2D, data_scale: f64) -> Result<Vec7> {
    let (n1, nh) = spec.counts.dim();
    let mut border = Vec::new();
    for i in 0..n1 {
        border.push(spec.counts[(i, 0)]);
        border.push(spec.counts[(i, nh - 1)]);
    }
    for j in 0..nh {
        border.push(spec.counts[(0, j)]);
        border.push(spec.counts[(n1 - 1, j)]);
    }
    let b0 = border.iter().sum::<f64>() / border.len() as f64;
    let peak = spec.counts.iter().fold(f64::MIN, |m, v| m.max(*v));
    let (mut w, mut mx, mut my) = (0.0, 0.0, 0.0);
    for ((i, j), c) in spec.counts.indexed_iter() {
        let c = (c - b0).max(0.0);
        w += c;
        mx += c * spec.lambda1[i];
        my += c * spec.lambda_h[j];
    }
    if !(w > 0.0) || !(peak > b0) {
        return Err(Error::Degenerate("histogram has no peak above its border level".into()));
    }
    let (mx, my) = (mx / w, my / w);
    let (mut vxx, mut vyy, mut vxy) = (0.0, 0.0, 0.0);
    for ((i, j), c) in spec.counts.indexed_iter() {
        let c = (c - b0).max(0.0);
        let (dx, dy) = (spec.lambda1[i] - mx, spec.lambda_h[j] - my);
        vxx += c * dx * dx;
        vyy += c * dy * dy;
        vxy += c * dx * dy;
    }
    let (sx, sy) = ((vxx / w).sqrt(), (vyy / w).sqrt());
    let (bx, by) = spec.steps();
    let (sx, sy) = (sx.max(bx), sy.max(by));
    let rho = (vxy / w / ((vxx / w).sqrt() * (vyy / w).sqrt())).clamp(-0.99, 0.99);
    let rho = if rho.is_finite() { rho } else { 0.0 };
    Ok(Vec7::from([b0 / data_scale, (peak - b0) / data_scale, mx, my, sx.ln(), sy.ln(), rho.atanh()]))
}

fn step_is_small(delta: &Vec7, p: &Vec7) -> bool {
    let (sx, sy) = (p[4].exp(), p[5].exp());
    let scaled = [delta[0], delta[1], delta[2] / sx, delta[3] / sy, delta[4], delta[5], delta[6]];
    scaled.iter().all(|d| d.abs() <= STEP_TOLERANCE)
}

/// Levenberg-Marquardt fit started from the histogram moments.
pub fn fit_gaussian_2d(spec: &Spectrum2D) -> Result<GaussianFit> {
    fit_from(spec, None)
}

/// Same fit, started from `start` when given.
pub fn fit_from(spec: &Spectrum2D, start: Option<&GaussianFit>) -> Result<GaussianFit> {
    let (n1, nh) = spec.counts.dim();
    if n1 < MIN_BINS || nh < MIN_BINS {
        return Err(Error::Domain(format!("fit needs at least {MIN_BINS}x{MIN_BINS} bins, got {n1}x{nh}")));
    }
    let max = spec.counts.iter().fold(0.0f64, |m, v| m.max(*v));
    let min = spec.counts.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(max > 0.0) || max == min {
        return Err(Error::Degenerate("histogram is empty or flat".into()));
    }
    let mut p = match start {
        Some(f) if f.sigma[0] > 0.0 && f.sigma[1] > 0.0 && f.rho.abs() < 1.0 => f.params(max),
        _ => initial_guess(spec, max)?,
    };
    let (mut jtj, mut jtr, mut cost) = normal_equations(spec, max, &p);
    let mut lambda = 1e-3;
    for iter in 1..=MAX_ITERATIONS {
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..7 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let delta = match a.cholesky() {
                Some(ch) => -ch.solve(&jtr),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial = p + delta;
            if trial.iter().all(|v| v.is_finite()) {
                let (tj, tr, tc) = normal_equations(spec, max, &trial);
                if tc <= cost {
                    let small = step_is_small(&delta, &p);
                    let flat = cost - tc <= 1e-15 * cost;
                    p = trial;
                    jtj = tj;
                    jtr = tr;
                    cost = tc;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if small || (flat && tc == 0.0) {
                        return Ok(GaussianFit::from_params(&p, max, iter, cost));
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: stationary to rounding.
            return Ok(GaussianFit::from_params(&p, max, iter, cost));
        }
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}
