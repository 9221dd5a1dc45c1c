use nalgebra::DMatrix;

use super::grid::GridField2D;
use crate::error::{Error, Result};

/// Fields whose norm differs from 1 by more than this are rejected.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// First and second moments of |F|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// Intensity-weighted means on the (signal, herald) axes.
    pub means: [f64; 2],
    pub sigmas: [f64; 2],
    pub rho: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsReport {
    pub means: [f64; 2],
    pub sigmas: [f64; 2],
    pub rho: f64,
    pub schmidt_k: f64,
    pub norm: f64,
}

fn check_norm(field: &GridField2D) -> Result<f64> {
    let norm = field.norm();
    if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::NotNormalized(norm));
    }
    Ok(norm)
}

/// Means, widths and correlation of a normalized field. Sums run in a
/// fixed order.
pub fn compute_moments(field: &GridField2D) -> Result<Moments> {
    let norm = check_norm(field)?;
    let (a1, ah) = (&field.axis1, &field.axis_h);
    let xs: Vec<f64> = (0..a1.n).map(|i| a1.offset(i)).collect();
    let ys: Vec<f64> = (0..ah.n).map(|j| ah.offset(j)).collect();
    let (mut w, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (i, row) in field.values.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let p = v.norm_sqr();
            w += p;
            sx += p * xs[i];
            sy += p * ys[j];
        }
    }
    let (mx, my) = (sx / w, sy / w);
    let (mut vxx, mut vyy, mut vxy) = (0.0, 0.0, 0.0);
    for (i, row) in field.values.rows().into_iter().enumerate() {
        let dx = xs[i] - mx;
        for (j, v) in row.iter().enumerate() {
            let p = v.norm_sqr();
            let dy = ys[j] - my;
            vxx += p * dx * dx;
            vyy += p * dy * dy;
            vxy += p * dx * dy;
        }
    }
    let (sx, sy) = ((vxx / w).sqrt(), (vyy / w).sqrt());
    if !(sx > 0.0 && sy > 0.0) {
        return Err(Error::Degenerate("field has a zero-width marginal".into()));
    }
    Ok(Moments {
        means: [a1.center() + mx, ah.center() + my],
        sigmas: [sx, sy],
        rho: (vxy / w / (sx * sy)).clamp(-1.0, 1.0),
        norm,
    })
}

/// Schmidt coefficients λᵢ: squared singular values of the amplitude
/// matrix, normalized to sum to 1, in descending order.
pub fn schmidt_coefficients(field: &GridField2D) -> Result<Vec<f64>> {
    check_norm(field)?;
    let (n1, nh) = field.values.dim();
    let m = DMatrix::from_fn(n1, nh, |i, j| field.values[(i, j)]);
    let sv = m.singular_values();
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let mut lambda: Vec<f64> = sv.iter().map(|s| s * s / total).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok(lambda)
}

/// K = 1/Σλᵢ².
pub fn schmidt_number(field: &GridField2D) -> Result<f64> {
    let lambda = schmidt_coefficients(field)?;
    Ok(1.0 / lambda.iter().map(|l| l * l).sum::<f64>())
}

pub fn compute_stats(field: &GridField2D) -> Result<StatsReport> {
    let m = compute_moments(field)?;
    Ok(StatsReport { means: m.means, sigmas: m.sigmas, rho: m.rho, schmidt_k: schmidt_number(field)?, norm: m.norm })
}
