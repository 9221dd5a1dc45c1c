//! Measurement-side pipeline: Gaussian fits of joint spectral histograms,
//! spectrometer deconvolution, Poisson Monte Carlo error bars, g² and the
//! phasematching calibration against delay sweeps.

mod calibrate;
mod fit;
mod g2;
mod montecarlo;
mod report;
mod spectrum;

pub use calibrate::{calibrate_phasematching, calibrate_to_slope, Calibration, CalibrationOptions, OPEN_SLOPE_TOLERANCE};
pub use fit::{fit_from, fit_gaussian_2d, GaussianFit, MAX_ITERATIONS, MIN_BINS, STEP_TOLERANCE};
pub use g2::{g2_cross_correlation, CountRates};
pub use montecarlo::{montecarlo_errorbars, ErrorBars, DEFAULT_TRIALS, MAX_FAILURE_RATE, MIN_TRIALS};
pub use report::{deconvolve_resolution, FitReport, JointSpectrumParams, ResolutionModel};
pub use spectrum::Spectrum2D;
