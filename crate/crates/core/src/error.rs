use thiserror::Error;

/// Errors raised by the models, the grid engine and the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a formula (non-positive
    /// wavelength, |ρ| ≥ 1, zero variance, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The chirp configuration makes the lens singular, e.g. a zero escort
    /// chirp (infinite focal length).
    #[error("singular lens configuration: {0}")]
    Singular(String),

    /// A1 = -Ae: the upconversion maps time to frequency instead of imaging.
    #[error("time-to-frequency regime (A1 = -Ae = {0:e} s^2): the lens does not image")]
    TimeToFrequency(f64),

    /// A closed form was asked for in a regime it does not cover.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// A grid does not hold enough of the represented feature.
    #[error("grid coverage error: {0}")]
    Coverage(String),

    /// A grid is too coarse to hold the temporal extent of a chirped field.
    #[error("grid aliasing error: {0}")]
    Aliasing(String),

    /// Two axes that must share a frequency step do not.
    #[error("axis step mismatch ({0:e} vs {1:e} rad/s): resampling required")]
    StepMismatch(f64, f64),

    #[error("field is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("fit did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Instrument resolution is at least as wide as the measured feature.
    #[error("unphysical deconvolution: {0}")]
    Deconvolution(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
