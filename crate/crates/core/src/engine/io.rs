//! Export and import of grid fields.
//!
//! CSV: one row per grid point, signal index outer. Frequency-domain
//! columns are `omega1_rad_s,omegah_rad_s,abs2_s2_per_rad2,arg_rad`; time-domain
//! columns are `t1_s,th_s,abs2_per_s2,arg_rad`.
//!
//! Binary: little-endian f64 throughout. An eight-value header
//! `[magic, version, n1, nh, start1, start_h, step1, step_h]` is followed by
//! `n1*nh` complex values as interleaved (re, im) pairs in row-major order.

use std::io::{BufRead, Read, Write};

use ndarray::Array2;
use num_complex::Complex64;

use super::grid::{Domain, Grid1D, GridField2D};
use crate::error::{Error, Result};

/// "TLJS" read as a big-endian u32.
pub const BINARY_MAGIC: f64 = u32::from_be_bytes(*b"TLJS") as f64;
pub const BINARY_VERSION: f64 = 1.0;

pub fn csv_header(domain: Domain) -> &'static str {
    match domain {
        Domain::Frequency => "omega1_rad_s,omegah_rad_s,abs2_s2_per_rad2,arg_rad",
        Domain::Time => "t1_s,th_s,abs2_per_s2,arg_rad",
    }
}

pub fn write_csv<W: Write>(field: &GridField2D, mut w: W) -> Result<()> {
    writeln!(w, "{}", csv_header(field.domain))?;
    for ((i, j), v) in field.values.indexed_iter() {
        writeln!(w, "{:e},{:e},{:e},{:e}", field.axis1.at(i), field.axis_h.at(j), v.norm_sqr(), v.arg())?;
    }
    w.flush()?;
    Ok(())
}

fn axis_from(values: &[f64], what: &str) -> Result<Grid1D> {
    if values.len() < 2 {
        return Err(Error::Parse(format!("{what} axis has fewer than two points")));
    }
    let step = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
    for (i, v) in values.iter().enumerate() {
        if (v - (values[0] + i as f64 * step)).abs() > 1e-9 * step {
            return Err(Error::Parse(format!("{what} axis is not uniform at index {i}")));
        }
    }
    Grid1D::new(values[0], step, values.len())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<GridField2D> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))??;
    let domain = match header.trim() {
        h if h == csv_header(Domain::Frequency) => Domain::Frequency,
        h if h == csv_header(Domain::Time) => Domain::Time,
        h => return Err(Error::Parse(format!("unrecognized header '{h}'"))),
    };
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        if cols.len() != 4 {
            return Err(Error::Parse(format!("line {}: expected 4 columns, got {}", lineno + 2, cols.len())));
        }
        rows.push([cols[0], cols[1], cols[2], cols[3]]);
    }
    let first = rows.first().ok_or_else(|| Error::Parse("field file has no data rows".into()))?[0];
    let nh = rows.iter().take_while(|r| r[0] == first).count();
    if nh == 0 || rows.len() % nh != 0 {
        return Err(Error::Parse("rows do not form a rectangular grid".into()));
    }
    let n1 = rows.len() / nh;
    let a1: Vec<f64> = (0..n1).map(|i| rows[i * nh][0]).collect();
    let ah: Vec<f64> = rows[..nh].iter().map(|r| r[1]).collect();
    let axis1 = axis_from(&a1, "signal")?;
    let axis_h = axis_from(&ah, "herald")?;
    let values = Array2::from_shape_fn((n1, nh), |(i, j)| {
        let r = rows[i * nh + j];
        Complex64::from_polar(r[2].max(0.0).sqrt(), r[3])
    });
    GridField2D::new(axis1, axis_h, values, domain)
}

pub fn write_binary<W: Write>(field: &GridField2D, mut w: W) -> Result<()> {
    if field.domain != Domain::Frequency {
        return Err(Error::Unsupported("binary dumps hold frequency-domain fields only".into()));
    }
    let (n1, nh) = field.values.dim();
    let header = [
        BINARY_MAGIC,
        BINARY_VERSION,
        n1 as f64,
        nh as f64,
        field.axis1.start,
        field.axis_h.start,
        field.axis1.step,
        field.axis_h.step,
    ];
    for v in header {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in field.values.iter() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridField2D> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut word).map_err(|e| Error::Parse(format!("truncated binary field: {e}")))?;
        Ok(f64::from_le_bytes(word))
    };
    let mut header = [0.0; 8];
    for h in header.iter_mut() {
        *h = next(&mut r)?;
    }
    if header[0] != BINARY_MAGIC {
        return Err(Error::Parse("not a binary field dump (bad magic)".into()));
    }
    if header[1] != BINARY_VERSION {
        return Err(Error::Parse(format!("unsupported binary version {}", header[1])));
    }
    let count = |v: f64| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 && v < 1e8 {
            Ok(v as usize)
        } else {
            Err(Error::Parse(format!("bad dimension {v}")))
        }
    };
    let (n1, nh) = (count(header[2])?, count(header[3])?);
    let axis1 = Grid1D::new(header[4], header[6], n1)?;
    let axis_h = Grid1D::new(header[5], header[7], nh)?;
    let mut values = Array2::zeros((n1, nh));
    for v in values.iter_mut() {
        let re = next(&mut r)?;
        let im = next(&mut r)?;
        *v = Complex64::new(re, im);
    }
    GridField2D::new(axis1, axis_h, values, Domain::Frequency)
}
