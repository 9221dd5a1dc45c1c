use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use timelens_cli::commands::{self, Format, ValidateOptions};
use timelens_cli::CliError;

#[derive(Parser)]
#[command(name = "timelens", version, about = "Upconversion time-lens simulator and joint-spectrum analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one lens pass: input/output joint spectra, statistics, heatmaps.
    Simulate(RunArgs),
    /// Sweep the escort delay and regress the output centre frequencies.
    Sweep(RunArgs),
    /// Fit a measured or simulated joint-spectrum histogram.
    Fit(FitArgs),
    /// Run the self-consistency suites; exit 1 on any failure.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct FitArgs {
    /// Histogram: CSV (herald bins in the header, signal bins in the first
    /// column) or the engine's binary matrix format.
    histogram: PathBuf,
    /// Takes resolutions, trials and seed from the [analysis] section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials; 0 skips the error bars.
    #[arg(long)]
    trials: Option<usize>,
    /// Signal spectrometer response σ, nm.
    #[arg(long)]
    signal_resolution: Option<f64>,
    /// Herald spectrometer response σ, nm.
    #[arg(long)]
    herald_resolution: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Also write validation.json and a manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
    /// Random configurations in the cross-engine suite.
    #[arg(long, default_value_t = 100)]
    configs: usize,
    /// Relative error injected into the closed-form output correlation.
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb_correlation: f64,
}

impl RunArgs {
    fn options(self) -> commands::RunOptions {
        commands::RunOptions {
            config: self.config,
            out: self.out,
            seed: self.seed,
            grid: self.grid,
            trials: self.trials,
            format: self.format,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let s = commands::simulate_cmd(&args.options())?;
            println!("input  rho = {:.5}  K = {:.3}", s.input.rho, s.input.schmidt_k);
            println!("output rho = {:.5}  K = {:.3}", s.output.rho, s.output.schmidt_k);
            println!("large-chirp parameter = {:.3} ({})", s.lcl_parameter, s.lcl_status);
            if let Some(cal) = s.calibration {
                println!("calibrated phasematching: {:?}", cal.model);
            }
            println!("wrote {}", s.files.join(", "));
        }
        Command::Sweep(args) => {
            let s = commands::sweep_cmd(&args.options())?;
            println!("signal slope = {:.4} THz/ps = {:.4} nm/ps", s.signal.thz_per_ps, s.signal.nm_per_ps);
            println!("herald slope = {:.4} THz/ps = {:.4} nm/ps", s.herald.thz_per_ps, s.herald.nm_per_ps);
            if !s.warnings.is_empty() {
                println!("{} delays outside the temporal aperture", s.warnings.len());
            }
            println!("wrote {}", s.files.join(", "));
        }
        Command::Fit(args) => {
            let opts = commands::FitOptions {
                histogram: args.histogram,
                config: args.config,
                out: args.out,
                seed: args.seed,
                trials: args.trials,
                resolution: [args.signal_resolution, args.herald_resolution],
            };
            let s = commands::fit_cmd(&opts)?;
            println!(
                "raw rho = {:.5}, deconvolved rho = {:.5}",
                s.report.raw.rho, s.report.deconvolved.rho
            );
            println!("wrote {}", s.files.join(", "));
        }
        Command::Validate(args) => {
            let opts = ValidateOptions {
                out: args.out,
                seed: args.seed,
                grid: args.grid,
                configs: args.configs,
                perturb_correlation: args.perturb_correlation,
            };
            let (report, json) = commands::validate_cmd(&opts)?;
            println!("{}", serde_json::to_string_pretty(&json).expect("report serializes"));
            if !report.passed() {
                let failed: Vec<&str> = report.suites.iter().filter(|s| !s.passed()).map(|s| s.name).collect();
                return Err(CliError::Validation(format!("suites failed: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
