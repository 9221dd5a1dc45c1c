//! Experiment configuration files.
//!
//! Sectioned `key = value unit` text. `#` starts a comment. Every physical
//! quantity needs a unit; dimensionless values (ρ, grid sizes, seeds) must
//! not have one. Unknown sections or keys are errors.
//!
//! ```text
//! [input]
//! signal_center = 811.006 nm
//! signal_fwhm = 1.840 THz        # or nm (FWHM), or signal_sigma in rad/s
//! rho = -0.9776
//! ```
//!
//! Widths given in nm or THz are intensity FWHMs; `*_sigma` keys take the
//! intensity standard deviation in rad/s.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;
use timelens::analysis::{ResolutionModel, DEFAULT_TRIALS};
use timelens::engine::{delay_range, GridSpec};
use timelens::units::{bandwidth_nm_to_thz, wavelength_to_angular, FS, FS2, PS, THZ};
use timelens::{AngularFrequency, Chirp, EscortPulse, GaussianJsa, LensConfig, PhasematchingModel, SpectralWidth, Wavelength};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: key '{key}': {message}")]
    Key { line: usize, key: String, message: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Wavelength,
    /// FWHM in nm or THz.
    Fwhm,
    /// Standard deviation in rad/s.
    Sigma,
    /// Standard deviation in rad/s, or `infinite`.
    SigmaOrInfinite,
    Chirp,
    Time,
    Slope,
    Number,
    Count,
}

impl Kind {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::Wavelength => &[("nm", 1.0), ("um", 1e3), ("m", 1e9)],
            Kind::Fwhm => &[("nm", 1.0), ("THz", 1.0)],
            Kind::Sigma | Kind::SigmaOrInfinite => &[("rad/s", 1.0)],
            Kind::Chirp => &[("fs^2", FS2), ("ps^2", PS * PS), ("s^2", 1.0)],
            Kind::Time => &[("fs", FS), ("ps", PS), ("s", 1.0)],
            Kind::Slope => &[("THz/ps", 2.0 * std::f64::consts::PI * THZ / PS)],
            Kind::Number | Kind::Count => &[],
        }
    }
}

const SCHEMA: &[(&str, &str, Kind)] = &[
    ("input", "signal_center", Kind::Wavelength),
    ("input", "herald_center", Kind::Wavelength),
    ("input", "signal_fwhm", Kind::Fwhm),
    ("input", "signal_sigma", Kind::Sigma),
    ("input", "herald_fwhm", Kind::Fwhm),
    ("input", "herald_sigma", Kind::Sigma),
    ("input", "rho", Kind::Number),
    ("escort", "center", Kind::Wavelength),
    ("escort", "fwhm", Kind::Fwhm),
    ("escort", "sigma", Kind::Sigma),
    ("escort", "chirp", Kind::Chirp),
    ("lens", "signal_chirp", Kind::Chirp),
    ("lens", "output_chirp", Kind::Chirp),
    ("lens", "lcl_threshold", Kind::Number),
    ("phasematching", "sigma", Kind::SigmaOrInfinite),
    ("phasematching", "center", Kind::Wavelength),
    ("phasematching", "target_slope", Kind::Slope),
    ("delay", "tau", Kind::Time),
    ("delay", "start", Kind::Time),
    ("delay", "stop", Kind::Time),
    ("delay", "step", Kind::Time),
    ("grid", "n", Kind::Count),
    ("grid", "span", Kind::Number),
    ("analysis", "signal_resolution", Kind::Wavelength),
    ("analysis", "herald_resolution", Kind::Wavelength),
    ("analysis", "trials", Kind::Count),
    ("analysis", "seed", Kind::Count),
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    /// Converted to SI, except wavelengths (nm) and FWHMs (kept with unit).
    Number(f64),
    Fwhm { value: f64, thz: bool },
    Infinite,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    line: usize,
    value: Value,
}

/// How the phasematching function is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhasematchingSpec {
    Fixed(PhasematchingModel),
    /// Fit σΦ so the simulated signal slope equals this value (rad/s per s;
    /// the config gives it in THz/ps of ordinary frequency).
    Calibrate { target_slope: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Input state without chirp or delay.
    pub input: GaussianJsa,
    /// Lens with Φ ≡ 1 when the phasematching is still to be calibrated.
    pub lens: LensConfig,
    pub phasematching: PhasematchingSpec,
    pub tau: f64,
    pub sweep: Option<Vec<f64>>,
    pub grid: GridSpec,
    pub resolution: ResolutionModel,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let cfg = Self::parse(&text)?;
        Ok((cfg, text))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Parsed::new(text)?.build()
    }

    /// The delays the sweep command runs; calibration reuses them.
    pub fn delays(&self) -> Vec<f64> {
        self.sweep.clone().unwrap_or_else(|| delay_range(-2.0 * PS, 2.0 * PS, PS).expect("valid default range"))
    }
}

struct Parsed {
    entries: BTreeMap<(String, String), Entry>,
}

fn parse_number(s: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ConfigError::Key { line, key: key.into(), message: format!("'{s}' is not a number") })
}

impl Parsed {
    fn new(text: &str) -> Result<Self, ConfigError> {
        let mut section: Option<String> = None;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, message: format!("malformed section header '{body}'") })?
                    .trim();
                if !SCHEMA.iter().any(|(s, _, _)| *s == name) {
                    return Err(ConfigError::Syntax { line, message: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, rest) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, message: format!("expected 'key = value unit', got '{body}'") })?;
            let key = key.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| ConfigError::Key { line, key: key.into(), message: "appears before any [section]".into() })?;
            let full = format!("{sec}.{key}");
            let kind = SCHEMA
                .iter()
                .find(|(s, k, _)| *s == sec && *k == key)
                .map(|t| t.2)
                .ok_or_else(|| ConfigError::Key { line, key: full.clone(), message: "unknown key".into() })?;
            let value = Self::value(rest.trim(), kind, line, &full)?;
            if entries.insert((sec.to_string(), key.to_string()), Entry { line, value }).is_some() {
                return Err(ConfigError::Key { line, key: full, message: "duplicate key".into() });
            }
        }
        Ok(Parsed { entries })
    }

    fn value(text: &str, kind: Kind, line: usize, key: &str) -> Result<Value, ConfigError> {
        let mut parts = text.split_whitespace();
        let number = parts
            .next()
            .ok_or_else(|| ConfigError::Key { line, key: key.into(), message: "missing value".into() })?;
        let unit: Vec<&str> = parts.collect();
        let unit = unit.join(" ");
        if kind == Kind::SigmaOrInfinite && number == "infinite" {
            if !unit.is_empty() {
                return Err(ConfigError::Key { line, key: key.into(), message: "'infinite' takes no unit".into() });
            }
            return Ok(Value::Infinite);
        }
        let x = parse_number(number, line, key)?;
        let units = kind.units();
        if units.is_empty() {
            if !unit.is_empty() {
                return Err(ConfigError::Key { line, key: key.into(), message: format!("dimensionless, unexpected unit '{unit}'") });
            }
            if kind == Kind::Count && (x < 0.0 || x.fract() != 0.0) {
                return Err(ConfigError::Key { line, key: key.into(), message: format!("expected a non-negative integer, got {number}") });
            }
            return Ok(Value::Number(x));
        }
        let allowed = units.iter().map(|u| u.0).collect::<Vec<_>>().join(", ");
        if unit.is_empty() {
            return Err(ConfigError::Key { line, key: key.into(), message: format!("missing unit (expected one of: {allowed})") });
        }
        let scale = units
            .iter()
            .find(|u| u.0 == unit)
            .map(|u| u.1)
            .ok_or_else(|| ConfigError::Key { line, key: key.into(), message: format!("unknown unit '{unit}' (expected one of: {allowed})") })?;
        Ok(match kind {
            Kind::Fwhm => Value::Fwhm { value: x, thz: unit == "THz" },
            _ => Value::Number(x * scale),
        })
    }

    fn get(&self, sec: &str, key: &str) -> Option<Entry> {
        self.entries.get(&(sec.to_string(), key.to_string())).copied()
    }

    fn number(&self, sec: &str, key: &str) -> Option<(usize, f64)> {
        match self.get(sec, key) {
            Some(Entry { line, value: Value::Number(x) }) => Some((line, x)),
            _ => None,
        }
    }

    fn required(&self, sec: &str, key: &str) -> Result<(usize, f64), ConfigError> {
        self.number(sec, key).ok_or_else(|| ConfigError::Missing(format!("{sec}.{key}")))
    }

    fn wavelength(&self, sec: &str, key: &str) -> Result<(usize, f64), ConfigError> {
        let (line, nm) = self.required(sec, key)?;
        let omega = wavelength_to_angular(Wavelength::from_nm(nm).map_err(|e| key_error(line, sec, key, e))?)
            .map_err(|e| key_error(line, sec, key, e))?;
        Ok((line, omega.0))
    }

    /// Width σ (rad/s) from `<prefix>fwhm` or `<prefix>sigma`; FWHM in nm is
    /// converted at `center_nm`.
    fn width(&self, sec: &str, prefix: &str, center_nm: f64) -> Result<SpectralWidth, ConfigError> {
        let (fk, sk) = (format!("{prefix}fwhm"), format!("{prefix}sigma"));
        match (self.get(sec, &fk), self.get(sec, &sk)) {
            (Some(_), Some(e)) => Err(ConfigError::Key {
                line: e.line,
                key: format!("{sec}.{sk}"),
                message: format!("give either {sec}.{fk} or {sec}.{sk}, not both"),
            }),
            (Some(Entry { line, value: Value::Fwhm { value, thz } }), None) => {
                let thz_fwhm = if thz {
                    Ok(value)
                } else {
                    Wavelength::from_nm(center_nm).and_then(|c| bandwidth_nm_to_thz(value, c))
                };
                thz_fwhm
                    .and_then(|f| SpectralWidth::from_fwhm_hz(f * THZ))
                    .map_err(|e| key_error(line, sec, &fk, e))
            }
            (None, Some(Entry { line, value: Value::Number(x) })) => {
                SpectralWidth::new(x).map_err(|e| key_error(line, sec, &sk, e))
            }
            _ => Err(ConfigError::Missing(format!("{sec}.{fk} or {sec}.{sk}"))),
        }
    }

    fn build(&self) -> Result<ExperimentConfig, ConfigError> {
        let (_, s_nm) = self.required("input", "signal_center")?;
        let (_, h_nm) = self.required("input", "herald_center")?;
        let (_, omega1) = self.wavelength("input", "signal_center")?;
        let (_, omega_h) = self.wavelength("input", "herald_center")?;
        let s1 = self.width("input", "signal_", s_nm)?;
        let sh = self.width("input", "herald_", h_nm)?;
        let (rho_line, rho) = self.required("input", "rho")?;
        let input = GaussianJsa::new(AngularFrequency(omega1), AngularFrequency(omega_h), s1, sh, rho)
            .map_err(|e| key_error(rho_line, "input", "rho", e))?;

        let (_, e_nm) = self.required("escort", "center")?;
        let (_, omega_e) = self.wavelength("escort", "center")?;
        let se = self.width("escort", "", e_nm)?;
        let (ae_line, ae) = self.required("escort", "chirp")?;
        let escort = EscortPulse::new(AngularFrequency(omega_e), se, Chirp(ae)).map_err(|e| key_error(ae_line, "escort", "chirp", e))?;

        let (a1_line, a1) = self.required("lens", "signal_chirp")?;
        let mut lens = LensConfig::new(Chirp(a1), escort, PhasematchingModel::Infinite);
        lens.check_imaging().map_err(|e| key_error(a1_line, "lens", "signal_chirp", e))?;
        if let Some((line, ao)) = self.number("lens", "output_chirp") {
            let expected = lens.imaging_output_chirp().map_err(|e| key_error(line, "lens", "output_chirp", e))?;
            if (ao - expected.0).abs() > 1e-3 * expected.0.abs() {
                return Err(ConfigError::Key {
                    line,
                    key: "lens.output_chirp".into(),
                    message: format!(
                        "{:.4e} fs^2 does not satisfy the imaging equation (expected {:.4e} fs^2)",
                        ao / FS2,
                        expected.0 / FS2
                    ),
                });
            }
            lens.output_chirp = Some(Chirp(ao));
        }
        if let Some((line, t)) = self.number("lens", "lcl_threshold") {
            if !(t > 0.0) {
                return Err(ConfigError::Key { line, key: "lens.lcl_threshold".into(), message: "must be positive".into() });
            }
            lens.lcl_threshold = t;
        }

        let pm_center = match self.number("phasematching", "center") {
            Some(_) => AngularFrequency(self.wavelength("phasematching", "center")?.1),
            None => AngularFrequency(omega1 + omega_e),
        };
        let phasematching = match (self.get("phasematching", "sigma"), self.number("phasematching", "target_slope")) {
            (Some(e), Some(_)) => {
                return Err(ConfigError::Key {
                    line: e.line,
                    key: "phasematching.sigma".into(),
                    message: "give either sigma or target_slope, not both".into(),
                })
            }
            (None, Some((_, slope))) => PhasematchingSpec::Calibrate { target_slope: slope },
            (Some(Entry { line, value: Value::Number(w) }), None) => PhasematchingSpec::Fixed(
                PhasematchingModel::gaussian(SpectralWidth(w), pm_center)
                    .map_err(|e| key_error(line, "phasematching", "sigma", e))?,
            ),
            _ => PhasematchingSpec::Fixed(PhasematchingModel::Infinite),
        };
        if let PhasematchingSpec::Fixed(pm) = phasematching {
            lens.phasematching = pm;
        }

        let tau = self.number("delay", "tau").map_or(0.0, |e| e.1);
        let sweep_keys = ["start", "stop", "step"].map(|k| self.number("delay", k));
        let sweep = match sweep_keys {
            [None, None, None] => None,
            [Some(a), Some(b), Some(c)] => Some(delay_range(a.1, b.1, c.1).map_err(|e| key_error(c.0, "delay", "step", e))?),
            _ => return Err(ConfigError::Invalid("delay.start, delay.stop and delay.step must be given together".into())),
        };

        let mut grid = GridSpec::default();
        if let Some((_, n)) = self.number("grid", "n") {
            grid.n = n as usize;
        }
        if let Some((_, span)) = self.number("grid", "span") {
            grid.span = span;
        }
        let grid = GridSpec::new(grid.n, grid.span).map_err(|e| ConfigError::Invalid(format!("[grid]: {e}")))?;

        let r1 = self.number("analysis", "signal_resolution").map_or(0.0, |e| e.1);
        let rh = self.number("analysis", "herald_resolution").map_or(0.0, |e| e.1);
        let resolution = ResolutionModel::new(r1, rh).map_err(|e| ConfigError::Invalid(format!("[analysis]: {e}")))?;
        let trials = self.number("analysis", "trials").map_or(DEFAULT_TRIALS, |e| e.1 as usize);
        let seed = self.number("analysis", "seed").map_or(1, |e| e.1 as u64);

        Ok(ExperimentConfig { input, lens, phasematching, tau, sweep, grid, resolution, trials, seed })
    }
}

fn key_error(line: usize, sec: &str, key: &str, e: timelens::Error) -> ConfigError {
    ConfigError::Key { line, key: format!("{sec}.{key}"), message: e.to_string() }
}
