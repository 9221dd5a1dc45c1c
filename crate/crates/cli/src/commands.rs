use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use timelens::analysis::{
    calibrate_to_slope, fit_gaussian_2d, montecarlo_errorbars, Calibration, CalibrationOptions, FitReport,
    ResolutionModel, Spectrum2D,
};
use timelens::engine::{compute_stats, delay_sweep, io, simulate, EngineOptions, GridField2D, GridSpec, StatsReport};
use timelens::lens::{predict_output, LclStatus};
use timelens::units::{bandwidth_thz_to_nm, wavelength_of};
use timelens::validation::{run_validation, ValidationOptions, ValidationReport};
use timelens::{AngularFrequency, LensConfig};

use crate::config::{ExperimentConfig, PhasematchingSpec};
use crate::svg::{gaussian_contour, Axis, Heatmap};
use crate::{CliError, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Bin,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub trials: Option<usize>,
    pub format: Format,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub histogram: PathBuf,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// Spectrometer σ in nm; override the config's analysis section.
    pub resolution: [Option<f64>; 2],
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub configs: usize,
    pub perturb_correlation: f64,
}

/// Heatmap contour level, as a fraction of the fitted peak.
pub const CONTOUR_LEVEL: f64 = 0.25;

struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
        Ok(OutputDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let io_err = |source| CliError::Io { path: path.display().to_string(), source };
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut w)?;
        w.flush().map_err(io_err)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name).display().to_string();
        self.write(name, |w| w.write_all(text.as_bytes()).map_err(|source| CliError::Io { path, source }))
    }

    fn manifest(mut self, command: &str, config_text: Option<&str>, settings: Value) -> Result<Vec<String>, CliError> {
        let hash = config_text.map(|t| hex::encode(Sha256::digest(t.as_bytes())));
        let m = json!({
            "tool": "timelens",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config_sha256": hash,
            "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "settings": settings,
            "outputs": self.files,
        });
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        self.text("manifest.json", &(text + "\n"))?;
        Ok(self.files)
    }
}

fn load(opts: &RunOptions) -> Result<(ExperimentConfig, String), CliError> {
    let (mut cfg, text) = ExperimentConfig::load(&opts.config)?;
    if let Some(n) = opts.grid {
        cfg.grid = GridSpec::new(n, cfg.grid.span).map_err(|e| CliError::Usage(format!("--grid: {e}")))?;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(t) = opts.trials {
        cfg.trials = t;
    }
    Ok((cfg, text))
}

fn settings(cfg: &ExperimentConfig) -> Value {
    json!({ "grid_n": cfg.grid.n, "grid_span": cfg.grid.span, "seed": cfg.seed, "trials": cfg.trials })
}

fn engine(cfg: &ExperimentConfig) -> EngineOptions {
    EngineOptions { grid: cfg.grid, ..EngineOptions::default() }
}

/// The lens with its phasematching fixed, calibrating σΦ if requested.
fn resolve_lens(cfg: &ExperimentConfig) -> Result<(LensConfig, Option<Calibration>), CliError> {
    match cfg.phasematching {
        PhasematchingSpec::Fixed(_) => Ok((cfg.lens, None)),
        PhasematchingSpec::Calibrate { target_slope } => {
            let opts = CalibrationOptions { engine: engine(cfg), ..CalibrationOptions::default() };
            let cal = calibrate_to_slope(target_slope, &cfg.delays(), &cfg.lens, &cfg.input, opts)
                .context("phasematching calibration")?;
            Ok((LensConfig { phasematching: cal.model, ..cfg.lens }, Some(cal)))
        }
    }
}

fn write_calibration(out: &mut OutputDir, cal: &Calibration) -> Result<(), CliError> {
    let width = cal.model.width().map_or(f64::INFINITY, |w| w.0);
    let text = format!(
        "quantity,value\nsigma_phi_rad_s,{width:e}\ntarget_slope_thz_per_ps,{}\nachieved_slope_thz_per_ps,{}\nopen_slope_thz_per_ps,{}\nevaluations,{}\n",
        thz_per_ps(cal.target_slope),
        thz_per_ps(cal.achieved_slope),
        thz_per_ps(cal.open_slope),
        cal.evaluations
    );
    out.text("calibration.csv", &text)
}

/// (rad/s)/s → THz/ps.
pub fn thz_per_ps(slope: f64) -> f64 {
    slope / (2.0 * PI) * 1e-24
}

/// THz/ps → nm/ps at a carrier, keeping the sign of the frequency slope.
pub fn nm_per_ps(thz_per_ps: f64, carrier: AngularFrequency) -> Result<f64, CliError> {
    let lambda = wavelength_of(carrier).context("slope conversion")?;
    Ok(thz_per_ps.signum() * bandwidth_thz_to_nm(thz_per_ps.abs(), lambda).context("slope conversion")?)
}

fn write_field(out: &mut OutputDir, stem: &str, field: &GridField2D, format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => out.write(&format!("{stem}.csv"), |w| io::write_csv(field, w).context(format!("writing {stem}.csv"))),
        Format::Bin => out.write(&format!("{stem}.bin"), |w| io::write_binary(field, w).context(format!("writing {stem}.bin"))),
    }
}

/// Fits a Gaussian to the field intensity and returns its contour at
/// [`CONTOUR_LEVEL`] in rad/s, or None if the fit fails.
fn fitted_contour(field: &GridField2D) -> Option<Vec<(f64, f64)>> {
    // Fit in offsets from the axis centres, in units of 1e12 rad/s.
    const UNIT: f64 = 1e12;
    let l1: Vec<f64> = (0..field.axis1.n).map(|i| field.axis1.offset(i) / UNIT).collect();
    let lh: Vec<f64> = (0..field.axis_h.n).map(|j| field.axis_h.offset(j) / UNIT).collect();
    let intensity = field.intensity();
    let peak = intensity.iter().cloned().fold(0.0f64, f64::max);
    if !(peak > 0.0) {
        return None;
    }
    let spec = Spectrum2D::new(l1, lh, intensity.mapv(|v| 1e3 * v / peak)).ok()?;
    let fit = fit_gaussian_2d(&spec).ok()?;
    let (c1, ch) = (field.axis1.center(), field.axis_h.center());
    Some(
        gaussian_contour(fit.center, fit.sigma, fit.rho, CONTOUR_LEVEL, 120)
            .into_iter()
            .map(|(x, y)| (c1 + x * UNIT, ch + y * UNIT))
            .collect(),
    )
}

fn heatmap(field: &GridField2D, title: &str, x_label: &'static str) -> String {
    let contours = match fitted_contour(field) {
        Some(c) => vec![c],
        None => {
            eprintln!("warning: Gaussian fit failed for '{title}'; heatmap drawn without contour");
            vec![]
        }
    };
    let intensity = field.intensity();
    let axis = |g: &timelens::engine::Grid1D, label| Axis { first: g.at(0), last: g.last(), n: g.n, label, unit: "rad/s" };
    Heatmap {
        title: title.to_string(),
        x: axis(&field.axis1, x_label),
        y: axis(&field.axis_h, "herald angular frequency"),
        values: &intensity,
        contours,
    }
    .render()
}

pub const STATS_HEADER: &str = "state,engine,omega1_center_rad_s,omegah_center_rad_s,lambda1_center_nm,lambdah_center_nm,sigma1_rad_s,sigmah_rad_s,rho,schmidt_k,conversion_weight_arb";

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

fn lambda_nm(omega: Option<f64>) -> String {
    omega.and_then(|w| wavelength_of(AngularFrequency(w)).ok()).map_or(String::new(), |l| l.nm().to_string())
}

#[allow(clippy::too_many_arguments)]
fn stats_row(
    state: &str,
    engine: &str,
    means: [Option<f64>; 2],
    sigmas: [f64; 2],
    rho: f64,
    k: f64,
    weight: Option<f64>,
) -> String {
    format!(
        "{state},{engine},{},{},{},{},{:e},{:e},{},{},{}\n",
        opt(means[0]),
        opt(means[1]),
        lambda_nm(means[0]),
        lambda_nm(means[1]),
        sigmas[0],
        sigmas[1],
        rho,
        k,
        weight.map_or(String::new(), |w| w.to_string())
    )
}

fn grid_row(state: &str, s: &StatsReport, weight: Option<f64>) -> String {
    stats_row(state, "grid", [Some(s.means[0]), Some(s.means[1])], s.sigmas, s.rho, s.schmidt_k, weight)
}

pub struct SimulateSummary {
    pub input: StatsReport,
    pub output: StatsReport,
    pub lcl_parameter: f64,
    pub lcl_status: LclStatus,
    pub calibration: Option<Calibration>,
    pub files: Vec<String>,
}

pub fn simulate_cmd(opts: &RunOptions) -> Result<SimulateSummary, CliError> {
    let (cfg, text) = load(opts)?;
    let (lens, calibration) = resolve_lens(&cfg)?;
    let input = cfg.input.with_delay(cfg.tau);
    let sim = simulate(&lens, &input, engine(&cfg)).context("simulation")?;
    let si = compute_stats(&sim.input).context("input statistics")?;
    let so = compute_stats(&sim.output.field).context("output statistics")?;

    let mut out = OutputDir::create(&opts.out)?;
    write_field(&mut out, "jsi_input", &sim.input, opts.format)?;
    write_field(&mut out, "jsi_output", &sim.output.field, opts.format)?;

    let mut stats = format!("{STATS_HEADER}\n");
    stats += &grid_row("input", &si, None);
    stats += &stats_row(
        "input",
        "analytic",
        [Some(input.signal_center.0), Some(input.herald_center.0)],
        [input.signal_width.0, input.herald_width.0],
        input.rho,
        input.schmidt_number().context("input Schmidt number")?,
        None,
    );
    stats += &grid_row("output", &so, Some(sim.output.weight));
    // The closed forms cover Φ ≡ 1 only.
    let open = LensConfig { phasematching: timelens::PhasematchingModel::Infinite, ..lens };
    let prediction = predict_output(&open, &input).context("closed-form prediction")?;
    if lens.phasematching.is_infinite() {
        stats += &stats_row(
            "output",
            "analytic",
            [prediction.omega03.map(|w| w.0), prediction.herald_center.map(|w| w.0)],
            [prediction.sigma3.0, prediction.herald_width.0],
            prediction.rho_f,
            timelens::gaussian::schmidt_number(prediction.rho_f).context("output Schmidt number")?,
            None,
        );
    }
    out.text("stats.csv", &stats)?;
    out.text("jsi_input.svg", &heatmap(&sim.input, "input joint spectral intensity", "signal angular frequency"))?;
    out.text("jsi_output.svg", &heatmap(&sim.output.field, "output joint spectral intensity", "upconverted angular frequency"))?;
    if let Some(cal) = &calibration {
        write_calibration(&mut out, cal)?;
    }
    let files = out.manifest("simulate", Some(&text), settings(&cfg))?;
    Ok(SimulateSummary {
        input: si,
        output: so,
        lcl_parameter: prediction.lcl_parameter,
        lcl_status: prediction.lcl_status,
        calibration,
        files,
    })
}

pub const SWEEP_HEADER: &str =
    "tau_ps,omega03_rad_s,omega0h_rad_s,lambda03_nm,lambda0h_nm,sigma3_rad_s,sigma_hf_rad_s,rho_f,conversion_weight_arb,aperture_warning";
pub const SLOPES_HEADER: &str = "channel,slope_thz_per_ps,slope_nm_per_ps,carrier_nm";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slope {
    pub thz_per_ps: f64,
    pub nm_per_ps: f64,
    pub carrier_nm: f64,
}

pub struct SweepSummary {
    pub signal: Slope,
    pub herald: Slope,
    pub warnings: Vec<f64>,
    pub calibration: Option<Calibration>,
    pub files: Vec<String>,
}

fn slope(fit: Option<timelens::engine::LinearFit>, carrier: AngularFrequency) -> Result<Slope, CliError> {
    let fit = fit.ok_or_else(|| CliError::Usage("sweep delays are all equal".into()))?;
    let t = thz_per_ps(fit.slope);
    Ok(Slope {
        thz_per_ps: t,
        nm_per_ps: nm_per_ps(t, carrier)?,
        carrier_nm: wavelength_of(carrier).context("carrier wavelength")?.nm(),
    })
}

pub fn sweep_cmd(opts: &RunOptions) -> Result<SweepSummary, CliError> {
    let (cfg, text) = load(opts)?;
    let taus = cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::Usage("sweep needs delay.start, delay.stop and delay.step in the config".into()))?;
    if taus.len() < 3 {
        return Err(CliError::Usage(format!("sweep needs at least 3 delays, the config gives {}", taus.len())));
    }
    let (lens, calibration) = resolve_lens(&cfg)?;
    let sweep = delay_sweep(&lens, &cfg.input, &taus, engine(&cfg)).context("delay sweep")?;

    let mut out = OutputDir::create(&opts.out)?;
    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut warnings = Vec::new();
    for r in &sweep.rows {
        if r.aperture_warning {
            eprintln!("warning: tau = {} ps converts {:.2e} of the best row: outside the temporal aperture", r.tau * 1e12, r.weight);
            warnings.push(r.tau);
        }
        csv += &format!(
            "{},{:e},{:e},{},{},{:e},{:e},{},{:e},{}\n",
            r.tau * 1e12,
            r.omega03,
            r.omega0h,
            lambda_nm(Some(r.omega03)),
            lambda_nm(Some(r.omega0h)),
            r.sigma3,
            r.sigma_hf,
            r.rho_f,
            r.weight,
            r.aperture_warning
        );
    }
    out.text("sweep.csv", &csv)?;

    let signal = slope(sweep.signal, AngularFrequency(cfg.input.signal_center.0 + lens.escort.center.0))?;
    let herald = slope(sweep.herald, cfg.input.herald_center)?;
    let mut slopes = format!("{SLOPES_HEADER}\n");
    for (name, s) in [("signal", signal), ("herald", herald)] {
        slopes += &format!("{name},{},{},{}\n", s.thz_per_ps, s.nm_per_ps, s.carrier_nm);
    }
    out.text("slopes.txt", &slopes)?;

    for (k, &tau) in taus.iter().enumerate() {
        let sim = simulate(&lens, &cfg.input.with_delay(tau), engine(&cfg)).context(format!("panel at {} ps", tau * 1e12))?;
        let title = format!("output joint spectral intensity, delay {:.3} ps", tau * 1e12);
        out.text(&format!("panel_{k:02}.svg"), &heatmap(&sim.output.field, &title, "upconverted angular frequency"))?;
    }
    if let Some(cal) = &calibration {
        write_calibration(&mut out, cal)?;
    }
    let files = out.manifest("sweep", Some(&text), settings(&cfg))?;
    Ok(SweepSummary { signal, herald, warnings, calibration, files })
}

pub const FIT_HEADER: &str = "property,raw,raw_error,deconvolved,deconvolved_error";

pub fn fit_report_csv(report: &FitReport) -> Result<String, CliError> {
    let (raw, dec) = (&report.raw, &report.deconvolved);
    let (rt, dt) = (raw.fwhm_thz().context("FWHM conversion")?, dec.fwhm_thz().context("FWHM conversion")?);
    let e = report.errors.as_ref();
    let err = |f: &dyn Fn(&timelens::analysis::ErrorBars) -> f64| e.map_or(String::new(), |b| f(b).to_string());
    let rows: Vec<(&str, f64, String, f64, String)> = vec![
        ("signal_center_nm", raw.center_nm[0], err(&|b| b.center_nm[0]), dec.center_nm[0], err(&|b| b.center_nm[0])),
        ("signal_fwhm_nm", raw.fwhm_nm[0], err(&|b| b.fwhm_nm[0]), dec.fwhm_nm[0], err(&|b| b.deconvolved_fwhm_nm[0])),
        ("signal_fwhm_thz", rt[0], err(&|b| b.fwhm_thz[0]), dt[0], err(&|b| b.deconvolved_fwhm_thz[0])),
        ("herald_center_nm", raw.center_nm[1], err(&|b| b.center_nm[1]), dec.center_nm[1], err(&|b| b.center_nm[1])),
        ("herald_fwhm_nm", raw.fwhm_nm[1], err(&|b| b.fwhm_nm[1]), dec.fwhm_nm[1], err(&|b| b.deconvolved_fwhm_nm[1])),
        ("herald_fwhm_thz", rt[1], err(&|b| b.fwhm_thz[1]), dt[1], err(&|b| b.deconvolved_fwhm_thz[1])),
        ("correlation", raw.rho, err(&|b| b.rho), dec.rho, err(&|b| b.deconvolved_rho)),
        (
            "schmidt_k",
            raw.schmidt_k().context("Schmidt number")?,
            err(&|b| b.schmidt_k),
            dec.schmidt_k().context("Schmidt number")?,
            err(&|b| b.deconvolved_schmidt_k),
        ),
        (
            "joint_energy_uncertainty_thz",
            raw.joint_energy_uncertainty_thz().context("joint energy uncertainty")?,
            err(&|b| b.joint_energy_uncertainty_thz),
            dec.joint_energy_uncertainty_thz().context("joint energy uncertainty")?,
            err(&|b| b.deconvolved_joint_energy_uncertainty_thz),
        ),
        ("background_counts", report.offset(), err(&|b| b.background), report.offset(), err(&|b| b.background)),
    ];
    let mut s = format!("{FIT_HEADER}\n");
    for (name, r, re, d, de) in rows {
        s += &format!("{name},{r},{re},{d},{de}\n");
    }
    Ok(s)
}

pub struct FitSummary {
    pub report: FitReport,
    pub files: Vec<String>,
}

pub fn fit_cmd(opts: &FitOptions) -> Result<FitSummary, CliError> {
    let (cfg, text) = match &opts.config {
        Some(p) => {
            let (c, t) = ExperimentConfig::load(p)?;
            (Some(c), Some(t))
        }
        None => (None, None),
    };
    let base = cfg.as_ref().map(|c| c.resolution).unwrap_or_default();
    let resolution = ResolutionModel::new(opts.resolution[0].unwrap_or(base.r1), opts.resolution[1].unwrap_or(base.rh))
        .map_err(|e| CliError::Usage(format!("resolution: {e}")))?;
    let trials = opts.trials.or(cfg.as_ref().map(|c| c.trials)).unwrap_or(timelens::analysis::DEFAULT_TRIALS);
    let seed = opts.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(1);
    if trials > 0 && trials < timelens::analysis::MIN_TRIALS {
        return Err(CliError::Usage(format!(
            "trials must be 0 (no error bars) or at least {}, got {trials}",
            timelens::analysis::MIN_TRIALS
        )));
    }

    let path = opts.histogram.display().to_string();
    let file = File::open(&opts.histogram).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let spec = Spectrum2D::read_any(std::io::BufReader::new(file)).context(format!("reading {path}"))?;
    let mut report = FitReport::from_spectrum(&spec, resolution).context("fit")?;
    if trials > 0 {
        let bars = montecarlo_errorbars(&spec, trials, seed, &resolution).context("Monte Carlo error bars")?;
        if !bars.quality_ok() {
            eprintln!(
                "warning: {} of {} Monte Carlo refits failed; error bars are unreliable",
                bars.failures, bars.trials
            );
        }
        report.errors = Some(bars);
    }
    let mut out = OutputDir::create(&opts.out)?;
    out.text("fitreport.csv", &fit_report_csv(&report)?)?;
    let settings = json!({
        "histogram": path,
        "histogram_sha256": std::fs::read(&opts.histogram).ok().map(|b| hex::encode(Sha256::digest(&b))),
        "signal_resolution_nm": resolution.r1,
        "herald_resolution_nm": resolution.rh,
        "trials": trials,
        "seed": seed,
    });
    let files = out.manifest("fit", text.as_deref(), settings)?;
    Ok(FitSummary { report, files })
}

pub fn validation_json(report: &ValidationReport) -> Value {
    let suites: Vec<Value> = report
        .suites
        .iter()
        .map(|s| {
            json!({
                "name": s.name,
                "passed": s.passed(),
                "checks": s.checks.len(),
                "worst_error_over_tolerance": s.worst_ratio(),
                "failures": s.failures().map(|c| json!({
                    "name": c.name, "value": c.value, "expected": c.expected, "tolerance": c.tolerance,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "passed": report.passed(),
        "lcl_parameter": report.lcl_parameter,
        "lcl_status": report.lcl_status.to_string(),
        "suites": suites,
        "diagnostics": report.diagnostics.iter().map(|d| json!({"name": d.name, "value": d.value, "note": d.note})).collect::<Vec<_>>(),
    })
}

pub fn validate_cmd(opts: &ValidateOptions) -> Result<(ValidationReport, Value), CliError> {
    let defaults = ValidationOptions::default();
    let grid = match opts.grid {
        Some(n) => GridSpec::new(n, defaults.grid.span).map_err(|e| CliError::Usage(format!("--grid: {e}")))?,
        None => defaults.grid,
    };
    let vopts = ValidationOptions {
        cross_engine_configs: opts.configs,
        seed: opts.seed.unwrap_or(defaults.seed),
        grid,
        correlation_perturbation: opts.perturb_correlation,
    };
    let report = run_validation(&vopts).context("validation")?;
    let value = validation_json(&report);
    if let Some(dir) = &opts.out {
        let mut out = OutputDir::create(dir)?;
        out.text("validation.json", &(serde_json::to_string_pretty(&value).expect("report serializes") + "\n"))?;
        out.manifest("validate", None, json!({"configs": opts.configs, "seed": vopts.seed, "grid_n": grid.n}))?;
    }
    Ok((report, value))
}

