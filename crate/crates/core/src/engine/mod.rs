//! Brute-force grid engine: sampled joint spectra, the SFG convolution,
//! time-domain transforms and moment statistics, all independent of the
//! closed forms in [`crate::lens`].

mod grid;
pub mod io;
mod sfg;
mod stats;
mod sweep;
mod time;

pub use grid::{
    sample_jsa, Domain, Grid1D, GridField2D, GridPlan, GridSpec, ALIAS_FACTOR, COVERAGE_TOLERANCE, MAX_POINTS,
    MIN_POINTS,
};
pub use sfg::{sfg_convolve, ConvolutionMethod, SfgOutput};
pub use stats::{compute_moments, compute_stats, schmidt_coefficients, schmidt_number, Moments, StatsReport};
pub use sweep::{
    delay_range, delay_sweep, linear_fit, simulate, EngineOptions, LinearFit, Simulation, SweepResult, SweepRow,
    APERTURE_THRESHOLD,
};
pub use time::to_time_domain;
