use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{Domain, Grid1D, GridField2D};
use crate::error::{Error, Result};

/// Phase factors turning a plain inverse DFT into a transform between axes
/// centred on their reference points: exp(i2π(j-m)(k-m)/n) with m = n/2.
fn centring(n: usize) -> (Vec<Complex64>, Complex64) {
    let m = (n / 2) as u128;
    let nn = n as u128;
    let turn = |num: u128| 2.0 * PI * (num % nn) as f64 / n as f64;
    let pre = (0..n as u128).map(|j| Complex64::from_polar(1.0, -turn(j * m))).collect();
    (pre, Complex64::from_polar(1.0, turn(m * m)))
}

fn transform_axis(values: &mut Array2<Complex64>, axis: Axis, step: f64) {
    let n = values.len_of(axis);
    let (pre, global) = centring(n);
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let scale = global * (step / (2.0 * PI).sqrt());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for mut lane in values.lanes_mut(axis) {
        for (b, (v, p)) in buf.iter_mut().zip(lane.iter().zip(&pre)) {
            *b = v * p;
        }
        ifft.process(&mut buf);
        for (v, (b, p)) in lane.iter_mut().zip(buf.iter().zip(&pre)) {
            *v = b * p * scale;
        }
    }
}

/// Joint temporal amplitude f(t1, th) = (2π)⁻¹ ∫∫ F(ω1, ωh) e^{i(x t1 + y th)} dω1 dωh,
/// with x, y measured from each axis' reference point. A spectral phase
/// exp(-iωτ) appears as a delay +τ. Time steps are 2π/(nΔω).
pub fn to_time_domain(field: &GridField2D) -> Result<GridField2D> {
    if field.domain != Domain::Frequency {
        return Err(Error::Unsupported("field is already in the time domain".into()));
    }
    let mut values = field.values.clone();
    transform_axis(&mut values, Axis(0), field.axis1.step);
    transform_axis(&mut values, Axis(1), field.axis_h.step);
    let t_axis = |g: &Grid1D| Grid1D::centered(0.0, 2.0 * PI / (g.n as f64 * g.step), g.n);
    GridField2D::new(t_axis(&field.axis1)?, t_axis(&field.axis_h)?, values, Domain::Time)
}
