use crate::error::{Error, Result};

/// Detector count rates in Hz and the laser repetition rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRates {
    pub singles_s: f64,
    pub singles_h: f64,
    pub coincidences: f64,
    pub rep_rate: f64,
}

impl CountRates {
    pub fn new(singles_s: f64, singles_h: f64, coincidences: f64, rep_rate: f64) -> Result<Self> {
        for (name, v) in [("signal singles", singles_s), ("herald singles", singles_h), ("coincidences", coincidences), ("repetition rate", rep_rate)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if coincidences > singles_s.min(singles_h) {
            return Err(Error::Domain("coincidence rate exceeds a singles rate".into()));
        }
        Ok(CountRates { singles_s, singles_h, coincidences, rep_rate })
    }
}

/// g² = P(s&h) / (P(s) P(h)), with per-pulse probabilities rate/rep_rate.
pub fn g2_cross_correlation(rates: &CountRates) -> Result<f64> {
    if !(rates.rep_rate > 0.0) {
        return Err(Error::Domain("repetition rate must be positive".into()));
    }
    if !(rates.singles_s > 0.0) || !(rates.singles_h > 0.0) {
        return Err(Error::Domain("g2 needs nonzero singles rates".into()));
    }
    let p = |r: f64| r / rates.rep_rate;
    Ok(p(rates.coincidences) / (p(rates.singles_s) * p(rates.singles_h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_rates() {
        let r = CountRates::new(2.5e6, 3.2e6, 4.15e5, 8e7).unwrap();
        let g = g2_cross_correlation(&r).unwrap();
        assert!((g - 4.15).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_rates_give_one() {
        let rep = 1e6;
        let (s, h) = (2e4, 5e4);
        let r = CountRates::new(s, h, s * h / rep, rep).unwrap();
        assert!((g2_cross_correlation(&r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(g2_cross_correlation(&CountRates::new(0.0, 1.0, 0.0, 1.0).unwrap()).is_err());
        assert!(g2_cross_correlation(&CountRates::new(1.0, 1.0, 0.5, 0.0).unwrap()).is_err());
        assert!(CountRates::new(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(CountRates::new(-1.0, 1.0, 0.0, 1.0).is_err());
    }
}
