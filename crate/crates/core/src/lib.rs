//! Gaussian and grid models of an upconversion time lens acting on
//! frequency-entangled photon pairs, plus the analysis used to compare
//! simulated and measured joint spectra.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod gaussian;
pub mod lens;
pub mod units;
pub mod validation;

pub use error::{Error, Result};
pub use gaussian::{EscortPulse, GaussianJsa, PhasematchingModel};
pub use lens::LensConfig;
pub use units::{AngularFrequency, Chirp, SpectralWidth, Wavelength};
