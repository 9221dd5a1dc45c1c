//! Closed-form physics of the upconversion time lens.
//!
//! Chirps follow the convention φ(ω) = A(ω-ω0)². The signal chirp A1 and the
//! escort chirp Ae act as propagation distance and focal length:
//! 1/A1 + 1/Ao = -1/Ae, with spectral magnification M = 1 + A1/Ae.
//!
//! The output-state formulas assume infinitely broad phasematching (Φ ≡ 1).
//! Finite phasematching and general delays are handled by the grid engine.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussian::{EscortPulse, GaussianJsa, PhasematchingModel};
use crate::units::{AngularFrequency, Chirp, SpectralWidth};

/// Default threshold on [`lcl_parameter`] above which the large-chirp limit
/// is treated as satisfied.
pub const LCL_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensConfig {
    /// Chirp applied to the input signal, A1.
    pub signal_chirp: Chirp,
    pub escort: EscortPulse,
    /// Recompression chirp after the lens, Ao. Does not affect spectra.
    pub output_chirp: Option<Chirp>,
    pub phasematching: PhasematchingModel,
    pub lcl_threshold: f64,
}

impl LensConfig {
    pub fn new(signal_chirp: Chirp, escort: EscortPulse, phasematching: PhasematchingModel) -> Self {
        LensConfig {
            signal_chirp,
            escort,
            output_chirp: None,
            phasematching,
            lcl_threshold: LCL_THRESHOLD,
        }
    }

    pub fn escort_chirp(&self) -> Chirp {
        self.escort.chirp
    }

    /// Input state with this lens' signal chirp applied (delay untouched).
    pub fn chirped_input(&self, input: &GaussianJsa) -> GaussianJsa {
        input.with_chirp(self.signal_chirp)
    }

    /// The output chirp that satisfies the imaging equation.
    pub fn imaging_output_chirp(&self) -> Result<Chirp> {
        solve_imaging(ImagingUnknown::Output { input: self.signal_chirp, escort: self.escort.chirp })
    }

    /// The imaging condition is fixed by A1 and Ae. A1 = -Ae is rejected.
    pub fn check_imaging(&self) -> Result<()> {
        magnification(self.signal_chirp, self.escort.chirp).map(|_| ())
    }
}

/// Which of the three chirps to solve the imaging equation for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImagingUnknown {
    /// Solve for Ao given A1 and Ae.
    Output { input: Chirp, escort: Chirp },
    /// Solve for A1 given Ao and Ae.
    Input { output: Chirp, escort: Chirp },
    /// Solve for Ae given A1 and Ao.
    Escort { input: Chirp, output: Chirp },
}

/// Unique solution of 1/A1 + 1/Ao = -1/Ae for the missing chirp.
pub fn solve_imaging(unknown: ImagingUnknown) -> Result<Chirp> {
    fn nonzero(a: Chirp, name: &str) -> Result<f64> {
        if a.0 == 0.0 || !a.0.is_finite() {
            return Err(Error::Singular(format!("{name} must be finite and nonzero")));
        }
        Ok(a.0)
    }
    match unknown {
        ImagingUnknown::Output { input, escort } => {
            let a1 = nonzero(input, "A1")?;
            let ae = nonzero(escort, "Ae")?;
            if a1 + ae == 0.0 {
                return Err(Error::TimeToFrequency(a1));
            }
            Ok(Chirp(-a1 * ae / (a1 + ae)))
        }
        ImagingUnknown::Input { output, escort } => {
            let ao = nonzero(output, "Ao")?;
            let ae = nonzero(escort, "Ae")?;
            if ao + ae == 0.0 {
                return Err(Error::Singular("Ao = -Ae puts the object at infinity".into()));
            }
            Ok(Chirp(-ao * ae / (ao + ae)))
        }
        ImagingUnknown::Escort { input, output } => {
            let a1 = nonzero(input, "A1")?;
            let ao = nonzero(output, "Ao")?;
            if a1 + ao == 0.0 {
                return Err(Error::Singular("A1 = -Ao needs an infinite escort chirp".into()));
            }
            Ok(Chirp(-a1 * ao / (a1 + ao)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnification {
    pub spectral: f64,
    pub temporal: f64,
}

/// M_spectral = 1 + A1/Ae = 1/M_temporal.
pub fn magnification(a1: Chirp, ae: Chirp) -> Result<Magnification> {
    if ae.0 == 0.0 {
        return Err(Error::Singular("escort chirp Ae = 0 gives an infinite focal length".into()));
    }
    if a1.0 + ae.0 == 0.0 {
        return Err(Error::TimeToFrequency(a1.0));
    }
    let spectral = 1.0 + a1.0 / ae.0;
    Ok(Magnification { spectral, temporal: 1.0 / spectral })
}

/// 16(A1+Ae)²(1-ρ²)²σ1⁴: how far the pulses are chirped beyond their
/// transform limit. The large-chirp limit needs this to be ≫ 1.
pub fn lcl_parameter(a1: Chirp, ae: Chirp, rho: f64, sigma1: SpectralWidth) -> f64 {
    let q = 1.0 - rho * rho;
    let s = a1.0 + ae.0;
    16.0 * s * s * q * q * sigma1.0.powi(4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LclStatus {
    Satisfied,
    Marginal,
    Violated,
}

impl LclStatus {
    pub fn classify(parameter: f64, threshold: f64) -> Self {
        if parameter > threshold {
            LclStatus::Satisfied
        } else if parameter >= 1.0 {
            LclStatus::Marginal
        } else {
            LclStatus::Violated
        }
    }
}

impl fmt::Display for LclStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LclStatus::Satisfied => "satisfied",
            LclStatus::Marginal => "marginal",
            LclStatus::Violated => "violated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegimeFlags {
    pub lcl_satisfied: bool,
    /// The chirped escort is shorter than the chirped signal, so it only
    /// converts part of the photon and acts partly as a filter.
    pub escort_aperture_limited: bool,
    /// Phasematching narrows the Φ ≡ 1 output by more than 1%.
    pub phasematch_limited: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputStatePrediction {
    pub sigma3: SpectralWidth,
    pub rho_f: f64,
    /// Output carrier ω01 + ω0e; only defined for zero delay.
    pub omega03: Option<AngularFrequency>,
    pub herald_width: SpectralWidth,
    pub herald_center: Option<AngularFrequency>,
    pub lcl_parameter: f64,
    pub lcl_status: LclStatus,
    pub flags: RegimeFlags,
}

/// Common subexpressions of the output-state formulas.
struct Terms {
    /// Numerator of σ3² (the width of the Φ ≡ 1 convolution).
    n3: f64,
    /// Denominator of σ3².
    d: f64,
    /// Herald-width factor: σh,f² = σh² h / d.
    h: f64,
    /// Covariance factor: cov = ρ σ1 σh x / d.
    x: f64,
}

fn terms(s1: f64, se: f64, rho: f64, a1: f64, ae: f64) -> Terms {
    let q = 1.0 - rho * rho;
    let (s1_2, se_2) = (s1 * s1, se * se);
    let (s1_4, se_4) = (s1_2 * s1_2, se_2 * se_2);
    let sum = a1 + ae;
    let n3 = (2.0 - rho * rho) * s1_2 * se_2 + se_4 + q * s1_4 * (1.0 + 16.0 * sum * sum * se_4);
    let d = se_2 + q * s1_2 * (1.0 + 16.0 * a1 * a1 * s1_2 * se_2 + 16.0 * ae * ae * se_4);
    let h = se_2 + q * s1_2 * (1.0 + 16.0 * a1 * a1 * q * s1_2 * se_2 + 16.0 * ae * ae * se_4);
    let x = se_2 + q * s1_2 * (1.0 + 16.0 * ae * sum * se_4);
    Terms { n3, d, h, x }
}

fn require_infinite_phasematching(cfg: &LensConfig) -> Result<()> {
    if !cfg.phasematching.is_infinite() {
        return Err(Error::Unsupported(
            "closed-form output state assumes infinite phasematching; use the grid engine".into(),
        ));
    }
    Ok(())
}

fn require_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::Domain(format!("need |ρ| < 1, got {rho}")));
    }
    Ok(())
}

/// Output signal bandwidth σ3 with Φ ≡ 1:
///
/// ```text
/// σ3² = [(2-ρ²)σ1²σe² + σe⁴ + (1-ρ²)σ1⁴(1 + 16(A1+Ae)²σe⁴)]
///     / [σe² + (1-ρ²)σ1²(1 + 16A1²σ1²σe² + 16Ae²σe⁴)]
/// ```
pub fn output_sigma3(cfg: &LensConfig, input: &GaussianJsa) -> Result<SpectralWidth> {
    require_infinite_phasematching(cfg)?;
    require_rho(input.rho)?;
    let t = terms(input.signal_width.0, cfg.escort.width.0, input.rho, cfg.signal_chirp.0, cfg.escort.chirp.0);
    Ok(SpectralWidth((t.n3 / t.d).sqrt()))
}

/// Output herald bandwidth σh,f with Φ ≡ 1.
pub fn output_herald_width(cfg: &LensConfig, input: &GaussianJsa) -> Result<SpectralWidth> {
    require_infinite_phasematching(cfg)?;
    require_rho(input.rho)?;
    let t = terms(input.signal_width.0, cfg.escort.width.0, input.rho, cfg.signal_chirp.0, cfg.escort.chirp.0);
    Ok(SpectralWidth(input.herald_width.0 * (t.h / t.d).sqrt()))
}

/// Output correlation with Φ ≡ 1, from the exact Gaussian convolution:
///
/// ```text
/// ρf = ρ σ1 [σe² + (1-ρ²)σ1²(1 + 16Ae(A1+Ae)σe⁴)] / √(H · N3)
/// H  = σe² + (1-ρ²)σ1²[1 + 16A1²(1-ρ²)σ1²σe² + 16Ae²σe⁴]
/// N3 = (2-ρ²)σ1²σe² + σe⁴ + (1-ρ²)σ1⁴[1 + 16(A1+Ae)²σe⁴]
/// ```
///
/// It reduces to ρf = -ρ/√(4(1-ρ²)σ1²/σe² + 1) for Ae = -A1/2 in the large-chirp
/// limit and to ρ·sign(M) for an unbounded escort.
pub fn output_correlation(cfg: &LensConfig, input: &GaussianJsa) -> Result<f64> {
    require_infinite_phasematching(cfg)?;
    require_rho(input.rho)?;
    let t = terms(input.signal_width.0, cfg.escort.width.0, input.rho, cfg.signal_chirp.0, cfg.escort.chirp.0);
    Ok(input.rho * input.signal_width.0 * t.x / (t.h * t.n3).sqrt())
}

/// The two-line correlation formula exactly as it appears in print.
///
/// Kept as a diagnostic: it is dimensionally inconsistent and does not agree
/// with [`output_correlation`] or the grid engine. `validate` reports the gap.
pub fn output_correlation_as_printed(cfg: &LensConfig, input: &GaussianJsa) -> Result<f64> {
    require_infinite_phasematching(cfg)?;
    require_rho(input.rho)?;
    let s1 = input.signal_width.0;
    let se = cfg.escort.width.0;
    let r = input.rho;
    let a1 = cfg.signal_chirp.0;
    let ae = cfg.escort.chirp.0;
    let q = 1.0 - r * r;
    let (s1_2, se_2) = (s1 * s1, se * se);
    let (s1_4, se_4) = (s1_2 * s1_2, se_2 * se_2);
    let sum = a1 + ae;
    let lead = (a1 * a1 * q * s1_2 + ae * ae * se_2).sqrt()
        * (1.0
            + 16.0 * sum * q * s1_2 * ((a1 + 3.0 * ae) * q * s1_2 + ae * se_2 * (1.0 + 16.0 * sum * sum * q * s1_4)));
    let root = 2f64.sqrt() * (se_2 + 2.0 * q * s1_2 * (1.0 + 8.0 * sum * sum * q * s1_2 * se_2)).sqrt();
    let tail = se_2
        / ((se_2 + q * s1_2 * (1.0 + 16.0 * a1 * a1 * q * s1_2 * se_2 + 16.0 * ae * ae * se_4))
            * ((2.0 - r * r) * s1_2 * se_2 + se_4 + q * s1_4 * (1.0 + 16.0 * sum * sum * se_4)));
    Ok(-r * lead / root * tail)
}

/// Full Φ ≡ 1 prediction with regime flags.
pub fn predict_output(cfg: &LensConfig, input: &GaussianJsa) -> Result<OutputStatePrediction> {
    let sigma3 = output_sigma3(cfg, input)?;
    let rho_f = output_correlation(cfg, input)?;
    let herald_width = output_herald_width(cfg, input)?;
    let lcl = lcl_parameter(cfg.signal_chirp, cfg.escort.chirp, input.rho, input.signal_width);
    let lcl_status = LclStatus::classify(lcl, cfg.lcl_threshold);
    let signal_duration = crate::gaussian::chirped_temporal_width(input.signal_width, input.rho, cfg.signal_chirp)?;
    let flags = RegimeFlags {
        lcl_satisfied: lcl_status == LclStatus::Satisfied,
        escort_aperture_limited: cfg.escort.chirped_duration() < signal_duration,
        phasematch_limited: false,
    };
    let centered = input.delay == 0.0;
    Ok(OutputStatePrediction {
        sigma3,
        rho_f,
        omega03: centered.then_some(AngularFrequency(input.signal_center.0 + cfg.escort.center.0)),
        herald_width,
        herald_center: centered.then_some(input.herald_center),
        lcl_parameter: lcl,
        lcl_status,
        flags,
    })
}

/// Regime flags for any phasematching model. The phasematching flag compares
/// σΦ with the Φ ≡ 1 output width.
pub fn regime_flags(cfg: &LensConfig, input: &GaussianJsa) -> Result<RegimeFlags> {
    let open = LensConfig { phasematching: PhasematchingModel::Infinite, ..*cfg };
    let mut flags = predict_output(&open, input)?.flags;
    if let Some(w) = cfg.phasematching.width() {
        let s3 = output_sigma3(&open, input)?.0;
        flags.phasematch_limited = 1.0 / (1.0 + (s3 / w.0).powi(2)).sqrt() < 0.99;
    }
    Ok(flags)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteEscortLimit {
    pub sigma3: SpectralWidth,
    pub rho_f: f64,
    /// Large-chirp reduction |M|σ1.
    pub sigma3_lcl: SpectralWidth,
    /// Large-chirp reduction ρ·sign(M); equals -ρ·sign(A1+Ae) for Ae < 0.
    pub rho_f_lcl: f64,
}

/// σe → ∞ limits of the Φ ≡ 1 output width and correlation.
///
/// ```text
/// σ3 → √(1/(1-ρ²) + 16(A1+Ae)²σ1⁴) / (4|Ae|σ1)
/// ρf → ρ sign(Ae) 4(A1+Ae)√(1-ρ²)σ1² / √(1 + 16(A1+Ae)²(1-ρ²)σ1⁴)
/// ```
pub fn limit_infinite_escort(input: &GaussianJsa, a1: Chirp, ae: Chirp) -> Result<InfiniteEscortLimit> {
    require_rho(input.rho)?;
    let m = magnification(a1, ae)?;
    let q = input.purity_factor();
    let s1 = input.signal_width.0;
    let sum = a1.0 + ae.0;
    let sigma3 = (1.0 / q + 16.0 * sum * sum * s1.powi(4)).sqrt() / (4.0 * ae.0.abs() * s1);
    let rho_f = input.rho * ae.0.signum() * 4.0 * sum * q.sqrt() * s1 * s1
        / (1.0 + 16.0 * sum * sum * q * s1.powi(4)).sqrt();
    Ok(InfiniteEscortLimit {
        sigma3: SpectralWidth(sigma3),
        rho_f,
        sigma3_lcl: SpectralWidth(m.spectral.abs() * s1),
        rho_f_lcl: input.rho * m.spectral.signum(),
    })
}

/// Ae = -A1/2 (M = -1) in the large-chirp limit:
/// σ3 = σ1/√(4σ1²/σe² + 1), ρf = -ρ/√(4(1-ρ²)σ1²/σe² + 1).
pub fn limit_m_minus1(input: &GaussianJsa, escort_width: SpectralWidth) -> Result<(SpectralWidth, f64)> {
    require_rho(input.rho)?;
    let se = escort_width.0;
    if !(se > 0.0) {
        return Err(Error::Domain(format!("escort width must be positive, got {se:e}")));
    }
    let s1 = input.signal_width.0;
    let r = s1 * s1 / (se * se);
    let sigma3 = s1 / (4.0 * r + 1.0).sqrt();
    let rho_f = -input.rho / (4.0 * input.purity_factor() * r + 1.0).sqrt();
    Ok((SpectralWidth(sigma3), rho_f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuningRegime {
    /// Unbounded escort and phasematching, M = -1.
    Ideal,
    /// Escort much narrower than the signal: upconversion acts as a filter.
    FilterLimit,
    /// Long crystal: phasematching pins the output frequency.
    PhasematchLimit,
}

impl FromStr for TuningRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ideal" => Ok(TuningRegime::Ideal),
            "filter" | "filter_limit" => Ok(TuningRegime::FilterLimit),
            "phasematch" | "phasematch_limit" | "long_crystal" => Ok(TuningRegime::PhasematchLimit),
            other => Err(Error::Parse(format!("unknown tuning regime '{other}'"))),
        }
    }
}

/// Centre-frequency slopes dω/dτ in rad/s per second of delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tunability {
    pub signal: f64,
    pub herald: f64,
}

impl Tunability {
    /// Slopes as ordinary frequency per delay, THz/ps.
    pub fn thz_per_ps(&self) -> (f64, f64) {
        let k = 1.0 / (2.0 * std::f64::consts::PI) * 1e-12 / 1e12;
        (self.signal * k, self.herald * k)
    }
}

/// Delay tunability of the output and herald centres in the three limiting
/// regimes. Slopes scale as 1/A1.
pub fn tunability(a1: Chirp, input: &GaussianJsa, regime: TuningRegime) -> Result<Tunability> {
    if a1.0 == 0.0 || !a1.0.is_finite() {
        return Err(Error::Singular("tunability needs a finite nonzero signal chirp".into()));
    }
    let ratio = input.rho * input.herald_width.0 / input.signal_width.0;
    Ok(match regime {
        TuningRegime::Ideal => Tunability { signal: 1.0 / a1.0, herald: 0.0 },
        TuningRegime::FilterLimit => Tunability { signal: 1.0 / (2.0 * a1.0), herald: ratio / (2.0 * a1.0) },
        TuningRegime::PhasematchLimit => Tunability { signal: 0.0, herald: ratio / a1.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::FS2;
    use approx::assert_relative_eq;

    const S1: f64 = 4.909e12;
    const SE: f64 = 7.38e12;

    fn input(rho: f64) -> GaussianJsa {
        GaussianJsa::new(
            AngularFrequency(2.3226e15),
            AngularFrequency(2.5448e15),
            SpectralWidth(S1),
            SpectralWidth(1.1055 * S1),
            rho,
        )
        .unwrap()
    }

    fn lens(a1: f64, ae: f64, se: f64) -> LensConfig {
        let esc = EscortPulse::new(AngularFrequency(2.4318e15), SpectralWidth(se), Chirp(ae)).unwrap();
        LensConfig::new(Chirp(a1), esc, PhasematchingModel::Infinite)
    }

    fn fs2(a: f64) -> f64 {
        a * FS2
    }

    #[test]
    fn imaging_examples() {
        let ao = solve_imaging(ImagingUnknown::Output { input: Chirp(2.0), escort: Chirp(-1.0) }).unwrap();
        assert_relative_eq!(ao.0, 2.0);
        assert_relative_eq!(magnification(Chirp(2.0), Chirp(-1.0)).unwrap().spectral, -1.0);
        let ao = solve_imaging(ImagingUnknown::Output { input: Chirp::from_fs2(696e3), escort: Chirp::from_fs2(-344e3) })
            .unwrap();
        assert!((ao.fs2() - 680.18e3).abs() < 0.05e3, "{}", ao.fs2());
        let ao = solve_imaging(ImagingUnknown::Output { input: Chirp(3.0), escort: Chirp(3.0) }).unwrap();
        assert_relative_eq!(ao.0, -1.5);
        let a1 = solve_imaging(ImagingUnknown::Input { output: Chirp(2.0), escort: Chirp(-1.0) }).unwrap();
        assert_relative_eq!(a1.0, 2.0);
        let ae = solve_imaging(ImagingUnknown::Escort { input: Chirp(2.0), output: Chirp(2.0) }).unwrap();
        assert_relative_eq!(ae.0, -1.0);
    }

    #[test]
    fn imaging_degenerate() {
        assert!(matches!(
            solve_imaging(ImagingUnknown::Output { input: Chirp(1.0), escort: Chirp(-1.0) }),
            Err(Error::TimeToFrequency(_))
        ));
        assert!(matches!(magnification(Chirp(1.0), Chirp(0.0)), Err(Error::Singular(_))));
        assert!(matches!(magnification(Chirp(2.0), Chirp(-2.0)), Err(Error::TimeToFrequency(_))));
        assert!(solve_imaging(ImagingUnknown::Escort { input: Chirp(1.0), output: Chirp(-1.0) }).is_err());
    }

    #[test]
    fn magnification_examples() {
        let m = magnification(Chirp::from_fs2(696e3), Chirp::from_fs2(-344e3)).unwrap();
        assert_relative_eq!(m.spectral, 1.0 - 696.0 / 344.0, max_relative = 1e-14);
        assert!((m.spectral + 1.0233).abs() < 5e-5);
        assert_relative_eq!(m.spectral * m.temporal, 1.0);
        assert_eq!(magnification(Chirp(0.0), Chirp(1.0)).unwrap().spectral, 1.0);
        assert_relative_eq!(magnification(Chirp(-2.0 * 3.0), Chirp(3.0)).unwrap().spectral, -1.0);
    }

    #[test]
    fn sigma3_unchirped_is_plain_convolution() {
        let cfg = lens(0.0, 0.0, SE);
        for &rho in &[0.0, 0.5, -0.9] {
            let s = output_sigma3(&cfg, &input(rho)).unwrap().0;
            assert_relative_eq!(s, (S1 * S1 + SE * SE).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn experimental_goldens() {
        // Frozen from an independent evaluation of the exact Gaussian integral.
        let cfg = lens(fs2(696e3), fs2(-344e3), SE);
        let inp = GaussianJsa::new(
            AngularFrequency(2.3226e15),
            AngularFrequency(2.5448e15),
            SpectralWidth(S1),
            SpectralWidth(1.1 * S1),
            -0.9776,
        )
        .unwrap();
        assert_relative_eq!(output_sigma3(&cfg, &inp).unwrap().0, 3.033_806_968_98e12, max_relative = 1e-9);
        assert_relative_eq!(output_correlation(&cfg, &inp).unwrap(), 0.915_009_805_388_66, max_relative = 1e-9);
        assert_relative_eq!(
            output_herald_width(&cfg, &inp).unwrap().0,
            3.356_106_937_099e12,
            max_relative = 1e-9
        );
        // The printed correlation formula collapses because of its units.
        assert!(output_correlation_as_printed(&cfg, &inp).unwrap().abs() < 1e-60);
    }

    #[test]
    fn correlation_vanishes_without_input_correlation() {
        let cfg = lens(fs2(696e3), fs2(-344e3), SE);
        assert_eq!(output_correlation(&cfg, &input(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn finite_phasematching_is_rejected() {
        let mut cfg = lens(fs2(696e3), fs2(-344e3), SE);
        cfg.phasematching = PhasematchingModel::gaussian(SpectralWidth(1e13), AngularFrequency(4.7e15)).unwrap();
        assert!(matches!(output_sigma3(&cfg, &input(0.3)), Err(Error::Unsupported(_))));
        assert!(matches!(output_correlation(&cfg, &input(0.3)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn infinite_escort_limit_consistency() {
        let (a1, ae) = (fs2(696e3), fs2(-344e3));
        let inp = input(-0.9776);
        let lim = limit_infinite_escort(&inp, Chirp(a1), Chirp(ae)).unwrap();
        let cfg = lens(a1, ae, 1e3 * S1);
        assert_relative_eq!(output_sigma3(&cfg, &inp).unwrap().0, lim.sigma3.0, max_relative = 1e-3);
        assert_relative_eq!(output_correlation(&cfg, &inp).unwrap(), lim.rho_f, max_relative = 1e-3);
        assert_relative_eq!(lim.sigma3_lcl.0, (1.0 - 696.0 / 344.0f64).abs() * S1, max_relative = 1e-12);
        assert!((lim.sigma3_lcl.0 / S1 - 1.0233).abs() < 1e-4);
        assert_eq!(lim.rho_f_lcl, 0.9776);
        let lim = limit_infinite_escort(&input(-0.98), Chirp(a1), Chirp(ae)).unwrap();
        assert_eq!(lim.rho_f_lcl, 0.98);
        assert!(matches!(limit_infinite_escort(&inp, Chirp(a1), Chirp(-a1)), Err(Error::TimeToFrequency(_))));
    }

    #[test]
    fn m_minus1_limit() {
        let inp = input(0.0);
        let (s3, rf) = limit_m_minus1(&inp, SpectralWidth(2.0 * S1)).unwrap();
        assert_relative_eq!(s3.0, S1 / 2f64.sqrt(), max_relative = 1e-14);
        assert_eq!(rf, 0.0);
        let (s3, rf) = limit_m_minus1(&input(-0.9776), SpectralWidth(1e9 * S1)).unwrap();
        assert_relative_eq!(s3.0, S1, max_relative = 1e-12);
        assert_relative_eq!(rf, 0.9776, max_relative = 1e-12);
        let (_, rf) = limit_m_minus1(&input(-0.9776), SpectralWidth(SE)).unwrap();
        assert!((rf - 0.9414).abs() < 1e-4, "{rf}");
        assert!(limit_m_minus1(&inp, SpectralWidth(0.0)).is_err());
    }

    #[test]
    fn m_minus1_agrees_with_general_formula() {
        // Ae = -A1/2 with the chirps scaled ×10 to approach the large-chirp limit.
        let a1 = 10.0 * fs2(696e3);
        for &rho in &[-0.9776, -0.5, 0.3] {
            let inp = input(rho);
            let cfg = lens(a1, -a1 / 2.0, SE);
            let (s3, rf) = limit_m_minus1(&inp, SpectralWidth(SE)).unwrap();
            assert_relative_eq!(output_sigma3(&cfg, &inp).unwrap().0, s3.0, max_relative = 5e-3);
            assert_relative_eq!(output_correlation(&cfg, &inp).unwrap(), rf, max_relative = 5e-3);
        }
    }

    #[test]
    fn lcl_parameter_experimental() {
        let p = lcl_parameter(Chirp(fs2(696e3)), Chirp(fs2(-344e3)), -0.9776, SpectralWidth(S1));
        assert!((p - 2.3).abs() < 0.1, "{p}");
        assert_eq!(LclStatus::classify(p, LCL_THRESHOLD), LclStatus::Marginal);
        let f = predict_output(&lens(fs2(696e3), fs2(-344e3), SE), &input(-0.9776)).unwrap();
        assert!(!f.flags.lcl_satisfied);
        assert!(f.flags.escort_aperture_limited);
        let f = predict_output(&lens(fs2(696e3), fs2(-348e3), 1e3 * S1), &input(-0.9776)).unwrap();
        assert!(!f.flags.escort_aperture_limited);
    }

    #[test]
    fn tunability_examples() {
        let inp = input(-0.9776);
        let a1 = Chirp::from_fs2(696e3);
        let (sig, her) = tunability(a1, &inp, TuningRegime::Ideal).unwrap().thz_per_ps();
        assert!((sig - 0.229).abs() < 5e-4, "{sig}");
        assert_eq!(her, 0.0);
        let (sig, _) = tunability(a1, &inp, TuningRegime::FilterLimit).unwrap().thz_per_ps();
        assert!((sig - 0.114).abs() < 5e-4, "{sig}");
        let (sig, her) = tunability(a1, &inp, TuningRegime::PhasematchLimit).unwrap().thz_per_ps();
        assert_eq!(sig, 0.0);
        assert!((her + 0.247).abs() < 5e-4, "{her}");
        assert!("bogus".parse::<TuningRegime>().is_err());
        assert_eq!("filter-limit".parse::<TuningRegime>().unwrap(), TuningRegime::FilterLimit);
        assert!(tunability(Chirp(0.0), &inp, TuningRegime::Ideal).is_err());
    }

    proptest::proptest! {
        #[test]
        fn imaging_and_magnification_agree(a1 in -1e6f64..1e6, ae in -1e6f64..1e6) {
            proptest::prop_assume!(a1.abs() > 1.0 && ae.abs() > 1.0 && (a1 + ae).abs() > 1.0);
            let m = magnification(Chirp(a1), Chirp(ae)).unwrap();
            let ao = solve_imaging(ImagingUnknown::Output { input: Chirp(a1), escort: Chirp(ae) }).unwrap();
            proptest::prop_assert!((m.spectral - (-a1 / ao.0)).abs() <= 1e-9 * m.spectral.abs().max(1.0));
        }

        #[test]
        fn widths_even_in_rho(rho in -0.99f64..0.99, a1 in -2e-24f64..2e-24, ae in -2e-24f64..2e-24, se in 1e12f64..2e13) {
            let cfg = lens(a1, ae, se);
            let s_p = output_sigma3(&cfg, &input(rho)).unwrap().0;
            let s_m = output_sigma3(&cfg, &input(-rho)).unwrap().0;
            proptest::prop_assert!((s_p - s_m).abs() <= 1e-12 * s_p);
            let r_p = output_correlation(&cfg, &input(rho)).unwrap();
            let r_m = output_correlation(&cfg, &input(-rho)).unwrap();
            proptest::prop_assert!((r_p + r_m).abs() <= 1e-12);
            proptest::prop_assert!(r_p.abs() < 1.0);
        }

        #[test]
        fn sign_law_in_large_chirp_limit(rho in -0.95f64..0.95, a1 in 1e-24f64..5e-24, frac in 0.05f64..0.45) {
            proptest::prop_assume!(rho.abs() > 0.05);
            // Ae < 0, |Ae| < A1 so A1 + Ae > 0; the LCL threshold is enforced below.
            let ae = -frac * a1;
            let inp = input(rho);
            let p = lcl_parameter(Chirp(a1), Chirp(ae), rho, inp.signal_width);
            proptest::prop_assume!(p > LCL_THRESHOLD);
            let cfg = lens(a1, ae, 1e3 * S1);
            let rf = output_correlation(&cfg, &inp).unwrap();
            proptest::prop_assert_eq!(rf.signum(), -rho.signum() * (a1 + ae).signum());
        }

        #[test]
        fn tunability_linear_in_inverse_chirp(a in 1e-26f64..1e-23, k in 0.1f64..10.0) {
            let inp = input(-0.7);
            for regime in [TuningRegime::Ideal, TuningRegime::FilterLimit, TuningRegime::PhasematchLimit] {
                let t1 = tunability(Chirp(a), &inp, regime).unwrap();
                let t2 = tunability(Chirp(k * a), &inp, regime).unwrap();
                proptest::prop_assert!((t1.signal - k * t2.signal).abs() <= 1e-12 * t1.signal.abs());
                proptest::prop_assert!((t1.herald - k * t2.herald).abs() <= 1e-12 * t1.herald.abs());
            }
        }
    }
}
