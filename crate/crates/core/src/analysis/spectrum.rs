use std::io::{BufRead, Read, Write};

use ndarray::Array2;

use crate::engine::{io as field_io, Domain, GridField2D};
use crate::error::{Error, Result};
use crate::units::{wavelength_of, AngularFrequency, NM};

/// Joint spectral histogram on wavelength axes in nm. Rows follow the signal
/// axis, columns the herald axis.
///
/// Counts are stored as non-negative reals so that simulated intensities
/// and noiseless synthetic data can be fitted without rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub lambda1: Vec<f64>,
    pub lambda_h: Vec<f64>,
    pub counts: Array2<f64>,
}

fn check_axis(axis: &[f64], name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::Domain(format!("{name} axis needs at least two bins")));
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain(format!("{name} axis must be strictly increasing")));
    }
    for (i, v) in axis.iter().enumerate() {
        if (v - (axis[0] + i as f64 * step)).abs() > 1e-6 * step {
            return Err(Error::Domain(format!("{name} axis is not uniform at bin {i}")));
        }
    }
    Ok(())
}

impl Spectrum2D {
    pub fn new(lambda1: Vec<f64>, lambda_h: Vec<f64>, counts: Array2<f64>) -> Result<Self> {
        check_axis(&lambda1, "signal")?;
        check_axis(&lambda_h, "herald")?;
        if counts.dim() != (lambda1.len(), lambda_h.len()) {
            return Err(Error::Domain(format!(
                "counts shape {:?} does not match axes ({}, {})",
                counts.dim(),
                lambda1.len(),
                lambda_h.len()
            )));
        }
        if let Some(bad) = counts.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(Error::Domain(format!("counts must be finite and >= 0, found {bad}")));
        }
        Ok(Spectrum2D { lambda1, lambda_h, counts })
    }

    /// Uniform axis of `n` bins centred on `center` with spacing `step`.
    pub fn axis(center: f64, step: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| center + (i as f64 - (n - 1) as f64 / 2.0) * step).collect()
    }

    pub fn total(&self) -> f64 {
        self.counts.sum()
    }

    pub fn steps(&self) -> (f64, f64) {
        let s = |a: &[f64]| (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64;
        (s(&self.lambda1), s(&self.lambda_h))
    }

    /// Joint spectral intensity of a grid field on wavelength axes.
    ///
    /// Each frequency axis is mapped to wavelength to first order about its
    /// reference point, which keeps the bins uniform; the axes are reversed
    /// so wavelength increases. Values are |F|² scaled to `peak` at the
    /// maximum.
    pub fn from_field(field: &GridField2D, peak: f64) -> Result<Self> {
        if field.domain != Domain::Frequency {
            return Err(Error::Unsupported("only spectral fields map to wavelength".into()));
        }
        let map = |g: &crate::engine::Grid1D| -> Result<Vec<f64>> {
            let c = g.center();
            let lc = wavelength_of(AngularFrequency(c))?.0;
            let dl = lc / c * g.step;
            Ok((0..g.n).rev().map(|i| (lc - dl * g.offset(i)) / NM).collect())
        };
        let (l1, lh) = (map(&field.axis1)?, map(&field.axis_h)?);
        let intensity = field.intensity();
        let max = intensity.iter().fold(0.0f64, |m, v| m.max(*v));
        if !(max > 0.0) {
            return Err(Error::Degenerate("field is identically zero".into()));
        }
        let (n1, nh) = intensity.dim();
        let counts = Array2::from_shape_fn((n1, nh), |(i, j)| intensity[(n1 - 1 - i, nh - 1 - j)] * peak / max);
        Spectrum2D::new(l1, lh, counts)
    }

    /// CSV: header `lambda1_nm/lambdah_nm,<herald bins>`, then one row per
    /// signal bin, `<signal bin>,<counts...>`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "lambda1_nm/lambdah_nm")?;
        for l in &self.lambda_h {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for (l, row) in self.lambda1.iter().zip(self.counts.rows()) {
            write!(w, "{l}")?;
            for c in row {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(s) if s.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let (hline, header) = lines.next().ok_or_else(|| Error::Parse("histogram file is empty".into()))?;
        let header = header?;
        let mut cells = header.split(',');
        cells.next();
        let lambda_h = cells
            .enumerate()
            .map(|(c, v)| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {hline}, column {}: {e}", c + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        if lambda_h.is_empty() {
            return Err(Error::Parse(format!("row {hline}: header lists no herald bins")));
        }
        let mut lambda1 = Vec::new();
        let mut data = Vec::new();
        for (row, line) in lines {
            let line = line?;
            let vals = line
                .split(',')
                .enumerate()
                .map(|(c, v)| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {row}, column {}: {e}", c + 1))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() != lambda_h.len() + 1 {
                return Err(Error::Parse(format!(
                    "row {row}: expected {} columns, got {}",
                    lambda_h.len() + 1,
                    vals.len()
                )));
            }
            lambda1.push(vals[0]);
            data.extend_from_slice(&vals[1..]);
        }
        if lambda1.is_empty() {
            return Err(Error::Parse("histogram has no data rows".into()));
        }
        let counts = Array2::from_shape_vec((lambda1.len(), lambda_h.len()), data)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Spectrum2D::new(lambda1, lambda_h, counts)
    }

    /// Reads an engine binary field dump as a histogram of |F|².
    pub fn read_binary<R: Read>(r: R) -> Result<Self> {
        let field = field_io::read_binary(r)?;
        Spectrum2D::from_field(&field, 1.0)
    }

    /// Reads CSV or, if the file starts with the binary magic, a field dump.
    pub fn read_any<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() >= 8 && f64::from_le_bytes(bytes[..8].try_into().unwrap()) == field_io::BINARY_MAGIC {
            Spectrum2D::read_binary(bytes.as_slice())
        } else {
            Spectrum2D::read_csv(bytes.as_slice())
        }
    }
}
