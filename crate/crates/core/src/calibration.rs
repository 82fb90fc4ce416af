//! Yearly calibration from a top income share and job separation rates.
//!
//! Each year contributes two observables: the share of income held by the
//! top fraction of earners, and a job-separation count relative to
//! employment. The reset rate comes straight from the separation ratio; the
//! volatility is held at a fixed exogenous value (the share alone cannot
//! separate drift from volatility); the remaining degree of freedom — the
//! upper tail exponent `a` — is pinned by inverting the stationary top-share
//! formula under the constraint `a * b = r / D` that ties the two tail
//! exponents together.
//!
//! The share is not monotone in the tail exponent: it diverges to 1 at both
//! `a -> 1` (heavy tail) and `a -> inf` (all mass pinned at the reset level,
//! where the top group's income concentrates), with a single dip between.
//! A log-spaced scan therefore brackets every root before bisection, and
//! when several roots reproduce the observed share the configured selection
//! rule picks one and the result carries a warning.

use crate::error::{Error, Result};
use crate::model::{DerivedCoeffs, ModelParams, StationaryDistribution};
use crate::numeric::bisect;

/// Nodes in the log-spaced scan that brackets roots of the share equation.
const SCAN_NODES: usize = 256;

/// One year of observations, as loaded from a panel file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearObservation {
    pub year: i32,
    /// Income share of the top group, as a fraction in (0, 1).
    pub top1_share: f64,
    /// Job separations over the year, in the same units as `employment`.
    pub separations: f64,
    /// Employment level the separations are measured against.
    pub employment: f64,
}

impl YearObservation {
    pub fn validate(&self) -> Result<()> {
        if !self.top1_share.is_finite() || self.top1_share <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "year {}: top share must be positive, got {}",
                self.year, self.top1_share
            )));
        }
        if self.top1_share >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "year {}: top share must be a fraction below 1, got {}{}",
                self.year,
                self.top1_share,
                if self.top1_share <= 100.0 {
                    " — this looks like a percentage; divide by 100"
                } else {
                    ""
                }
            )));
        }
        if !(self.separations.is_finite() && self.separations >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "year {}: separations must be non-negative, got {}",
                self.year, self.separations
            )));
        }
        if !(self.employment.is_finite() && self.employment > 0.0) {
            return Err(Error::InvalidParams(format!(
                "year {}: employment must be positive, got {}",
                self.year, self.employment
            )));
        }
        Ok(())
    }
}

/// Annual reset rate from a separation count and an employment level.
///
/// With `hazard_transform` the separation ratio is read as the one-year
/// transition probability of a constant-rate process, `r = -ln(1 - s/e)`,
/// which requires the ratio to stay below 1. Without it the ratio is used
/// directly as the rate (values above 1 are then legitimate: they mean more
/// than one expected transition per year).
pub fn reset_rate(separations: f64, employment: f64, hazard_transform: bool) -> Result<f64> {
    if !(employment.is_finite() && employment > 0.0) {
        return Err(Error::InvalidParams(format!(
            "employment must be positive, got {employment}"
        )));
    }
    if !(separations.is_finite() && separations >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "separations must be non-negative, got {separations}"
        )));
    }
    let ratio = separations / employment;
    if ratio <= 0.0 {
        return Err(Error::NonPositiveRate(format!(
            "separation ratio {ratio} gives no resets; the stationary distribution does not exist"
        )));
    }
    if hazard_transform {
        if ratio >= 1.0 {
            return Err(Error::Domain(format!(
                "separation ratio {ratio} cannot be read as a one-year probability; \
                 disable the hazard transform or check the inputs"
            )));
        }
        Ok(-(-ratio).ln_1p())
    } else {
        Ok(ratio)
    }
}

/// Which root to keep when the share equation has several solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootSelection {
    /// Smallest tail exponent: the heaviest-tailed model consistent with
    /// the data, the conservative reading for inequality.
    #[default]
    Smallest,
    /// Largest tail exponent.
    Largest,
}

/// Calibration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    /// Exogenous log-income volatility (per sqrt-year).
    pub sigma_fixed: f64,
    /// Population fraction defining the top group (0.01 for the top 1%).
    pub share_fraction: f64,
    /// Search bracket for the upper tail exponent.
    pub a_bracket: (f64, f64),
    /// Largest acceptable residual |model share - observed share|.
    pub share_tolerance: f64,
    /// Read the separation ratio as a one-year probability (see
    /// [`reset_rate`]).
    pub hazard_transform: bool,
    pub root_selection: RootSelection,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            sigma_fixed: 0.2,
            share_fraction: 0.01,
            a_bracket: (1.0 + 1e-6, 100.0),
            share_tolerance: 1e-10,
            hazard_transform: false,
            root_selection: RootSelection::Smallest,
        }
    }
}

impl CalibrationConfig {
    fn validate(&self) -> Result<()> {
        if !(self.sigma_fixed > 0.0 && self.sigma_fixed.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "volatility must be positive, got {}",
                self.sigma_fixed
            )));
        }
        if !(self.share_fraction > 0.0 && self.share_fraction < 1.0) {
            return Err(Error::InvalidParams(format!(
                "top fraction must lie in (0, 1), got {}",
                self.share_fraction
            )));
        }
        let (lo, hi) = self.a_bracket;
        if !(lo > 1.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "tail exponent bracket must satisfy 1 < lo < hi, got ({lo}, {hi})"
            )));
        }
        if !(self.share_tolerance > 0.0 && self.share_tolerance.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "share tolerance must be positive, got {}",
                self.share_tolerance
            )));
        }
        Ok(())
    }
}

/// Non-fatal calibration notes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationWarning {
    /// The share equation had several solutions in the bracket; the root
    /// picked by [`RootSelection`] was kept and all roots are listed in the
    /// diagnostics.
    MultipleRoots,
}

impl std::fmt::Display for CalibrationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::MultipleRoots => {
                write!(f, "multiple tail-exponent roots match the observed share")
            }
        }
    }
}

/// How a year's fit went.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationDiagnostics {
    /// |model share - observed share| at the selected root.
    pub share_error: f64,
    /// All tail-exponent roots found in the bracket, ascending.
    pub roots: Vec<f64>,
    /// Bracket that was scanned.
    pub bracket: (f64, f64),
    pub warnings: Vec<CalibrationWarning>,
}

/// A fitted year.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedYear {
    pub year: i32,
    pub params: ModelParams,
    pub coeffs: DerivedCoeffs,
    pub diagnostics: CalibrationDiagnostics,
}

/// Panel fit: successfully calibrated years plus per-year failures.
#[derive(Debug)]
pub struct PanelCalibration {
    pub calibrated: Vec<CalibratedYear>,
    pub failures: Vec<YearFailure>,
}

#[derive(Debug)]
pub struct YearFailure {
    pub year: i32,
    pub error: Error,
}

/// Model share of the top `q` fraction when the upper tail exponent is `a`
/// and the product constraint fixes `b = r / (D a)`.
fn constrained_share(a: f64, r: f64, diffusion: f64, q: f64) -> Result<f64> {
    let b = r / (diffusion * a);
    StationaryDistribution::new(a, b, 1.0)?.top_share(q)
}

/// Fit one year: reset rate from the separation ratio, tail exponent from
/// the observed top share under fixed volatility.
pub fn calibrate_year(obs: &YearObservation, config: &CalibrationConfig) -> Result<CalibratedYear> {
    obs.validate()?;
    config.validate()?;
    let r = reset_rate(obs.separations, obs.employment, config.hazard_transform)?;
    let sigma = config.sigma_fixed;
    let diffusion = sigma * sigma / 2.0;
    let q = config.share_fraction;
    let (lo, hi) = config.a_bracket;

    let g = |a: f64| {
        constrained_share(a, r, diffusion, q).expect("tail exponents positive inside bracket")
            - obs.top1_share
    };

    // Log-spaced scan; the share curve is smooth with at most a few sign
    // changes, so bracketing on this mesh is reliable.
    let ratio = (hi / lo).powf(1.0 / (SCAN_NODES - 1) as f64);
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_a = lo;
    let mut prev_g = g(lo);
    if prev_g == 0.0 {
        roots.push(lo);
    }
    for k in 1..SCAN_NODES {
        let a_k = if k == SCAN_NODES - 1 {
            hi
        } else {
            lo * ratio.powi(k as i32)
        };
        let g_k = g(a_k);
        if g_k == 0.0 {
            roots.push(a_k);
        } else if prev_g != 0.0 && (prev_g < 0.0) != (g_k < 0.0) {
            roots.push(bisect(&g, prev_a, a_k, 1e-12 * a_k.max(1.0)));
        }
        prev_a = a_k;
        prev_g = g_k;
    }

    if roots.is_empty() {
        let share_at_lo = constrained_share(lo, r, diffusion, q)?;
        return if obs.top1_share >= share_at_lo {
            Err(Error::HeavyTail(format!(
                "year {}: a top share of {} needs an upper tail exponent at or below 1, \
                 where the mean income diverges and the share formula degenerates",
                obs.year, obs.top1_share
            )))
        } else {
            Err(Error::NoRoot(format!(
                "year {}: no tail exponent in [{lo}, {hi}] reproduces a top share of {} \
                 with volatility {sigma} and reset rate {r:.6}; consider a different fixed \
                 volatility",
                obs.year, obs.top1_share
            )))
        };
    }

    let mut warnings = Vec::new();
    if roots.len() > 1 {
        warnings.push(CalibrationWarning::MultipleRoots);
    }
    let a = match config.root_selection {
        RootSelection::Smallest => roots[0],
        RootSelection::Largest => *roots.last().expect("nonempty"),
    };
    let share_error = g(a).abs();
    if share_error > config.share_tolerance {
        return Err(Error::NotConverged(format!(
            "year {}: share residual {share_error:.3e} exceeds tolerance {:.3e}",
            obs.year, config.share_tolerance
        )));
    }

    let b = r / (diffusion * a);
    let log_drift = diffusion * (b - a);
    let drift = log_drift + diffusion;
    let params = ModelParams::new(drift, sigma, r)?;
    let coeffs = params.derive();
    Ok(CalibratedYear {
        year: obs.year,
        params,
        coeffs,
        diagnostics: CalibrationDiagnostics {
            share_error,
            roots,
            bracket: (lo, hi),
            warnings,
        },
    })
}

/// Fit every year of a panel, collecting failures instead of stopping at
/// the first bad year. Rows are processed in the given order.
pub fn calibrate_panel(panel: &[YearObservation], config: &CalibrationConfig) -> PanelCalibration {
    let mut calibrated = Vec::new();
    let mut failures = Vec::new();
    for obs in panel {
        match calibrate_year(obs, config) {
            Ok(fit) => calibrated.push(fit),
            Err(error) => failures.push(YearFailure {
                year: obs.year,
                error,
            }),
        }
    }
    PanelCalibration {
        calibrated,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(share: f64, sep: f64, emp: f64) -> YearObservation {
        YearObservation {
            year: 2000,
            top1_share: share,
            separations: sep,
            employment: emp,
        }
    }

    #[test]
    fn reset_rate_plain_ratio() {
        assert!((reset_rate(50.0, 200.0, false).unwrap() - 0.25).abs() < 1e-15);
        // Plain ratios above 1 are allowed: more than one transition a year.
        assert!((reset_rate(300.0, 200.0, false).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn reset_rate_hazard_transform() {
        let r = reset_rate(50.0, 200.0, true).unwrap();
        assert!((r - (-(0.75f64.ln()))).abs() < 1e-15, "r = {r}");
        assert!(matches!(
            reset_rate(200.0, 200.0, true),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            reset_rate(250.0, 200.0, true),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn reset_rate_rejects_zero_separations() {
        assert!(matches!(
            reset_rate(0.0, 200.0, false),
            Err(Error::NonPositiveRate(_))
        ));
        assert!(reset_rate(1.0, 0.0, false).is_err());
    }

    #[test]
    fn observation_percent_guard() {
        let err = obs(10.1, 50.0, 200.0).validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("percentage"), "message: {msg}");
        assert!(obs(0.101, 50.0, 200.0).validate().is_ok());
        assert!(obs(0.0, 50.0, 200.0).validate().is_err());
        assert!(obs(0.1, -1.0, 200.0).validate().is_err());
        assert!(obs(0.1, 50.0, 0.0).validate().is_err());
    }

    /// Fitting the share produced by known coefficients must return them.
    /// The reference year uses tail exponents (2, 6.25): its top-1% share is
    /// (b+1)/q * (p q / b)^((a-1)/a) with p = 0.01, about 0.100965.
    #[test]
    fn calibrate_recovers_reference_year() {
        let share = 7.25 / 8.25 * (0.01f64 * 8.25 / 6.25).sqrt();
        let fit = calibrate_year(&obs(share, 50.0, 200.0), &CalibrationConfig::default()).unwrap();
        assert!(
            (fit.coeffs.tail_upper - 2.0).abs() < 1e-6,
            "a = {}",
            fit.coeffs.tail_upper
        );
        assert!(
            (fit.coeffs.tail_lower - 6.25).abs() < 4e-6,
            "b = {}",
            fit.coeffs.tail_lower
        );
        assert!((fit.params.drift - 0.105).abs() < 1e-7);
        assert!((fit.params.volatility - 0.2).abs() < 1e-15);
        assert!((fit.coeffs.reset_rate - 0.25).abs() < 1e-15);
        assert!(fit.diagnostics.share_error <= 1e-10);
        assert!(fit.diagnostics.warnings.is_empty());
        assert_eq!(fit.year, 2000);
    }

    #[test]
    fn round_trip_through_derived_coefficients() {
        // Whatever root is selected, the rebuilt parameters must reproduce
        // the observed share exactly through the public model path.
        let fit = calibrate_year(&obs(0.12, 40.0, 160.0), &CalibrationConfig::default()).unwrap();
        let share = fit.params.stationary().top_share(0.01).unwrap();
        assert!((share - 0.12).abs() < 1e-9, "share {share}");
    }

    #[test]
    fn multiple_roots_are_reported_and_selectable() {
        // A share just above the dip of the share curve has two roots for
        // this rate/volatility combination.
        let config = CalibrationConfig::default();
        let fit = calibrate_year(&obs(0.049, 50.0, 200.0), &config).unwrap();
        assert_eq!(
            fit.diagnostics.warnings,
            vec![CalibrationWarning::MultipleRoots]
        );
        assert!(
            fit.diagnostics.roots.len() >= 2,
            "roots {:?}",
            fit.diagnostics.roots
        );
        let smallest = fit.coeffs.tail_upper;

        let config = CalibrationConfig {
            root_selection: RootSelection::Largest,
            ..config
        };
        let fit_hi = calibrate_year(&obs(0.049, 50.0, 200.0), &config).unwrap();
        assert!(fit_hi.coeffs.tail_upper > smallest + 1.0);
        // Both choices reproduce the observed share.
        for f in [&fit, &fit_hi] {
            let s = f.params.stationary().top_share(0.01).unwrap();
            assert!((s - 0.049).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasibly_small_share_is_no_root() {
        let err = calibrate_year(&obs(0.005, 50.0, 200.0), &CalibrationConfig::default());
        match err {
            Err(Error::NoRoot(msg)) => assert!(msg.contains("volatility"), "msg: {msg}"),
            other => panic!("expected NoRoot, got {other:?}"),
        }
    }

    #[test]
    fn near_unit_share_is_heavy_tail() {
        let err = calibrate_year(&obs(0.9999999, 50.0, 200.0), &CalibrationConfig::default());
        assert!(matches!(err, Err(Error::HeavyTail(_))), "got {err:?}");
    }

    #[test]
    fn panel_collects_failures_without_stopping() {
        let share = 7.25 / 8.25 * (0.01f64 * 8.25 / 6.25).sqrt();
        let panel = [
            obs(share, 50.0, 200.0),
            YearObservation {
                year: 2001,
                top1_share: 0.005,
                separations: 50.0,
                employment: 200.0,
            },
            YearObservation {
                year: 2002,
                top1_share: 0.12,
                separations: 40.0,
                employment: 160.0,
            },
        ];
        let out = calibrate_panel(&panel, &CalibrationConfig::default());
        assert_eq!(out.calibrated.len(), 2);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].year, 2001);
        assert!(matches!(out.failures[0].error, Error::NoRoot(_)));
    }

    #[test]
    fn config_validation() {
        let bad = CalibrationConfig {
            sigma_fixed: 0.0,
            ..CalibrationConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = CalibrationConfig {
            a_bracket: (0.9, 100.0),
            ..CalibrationConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = CalibrationConfig {
            a_bracket: (2.0, 2.0),
            ..CalibrationConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = CalibrationConfig {
            share_fraction: 1.0,
            ..CalibrationConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn hazard_transform_changes_rate_not_share_fit() {
        let share = 0.12;
        let plain =
            calibrate_year(&obs(share, 50.0, 200.0), &CalibrationConfig::default()).unwrap();
        let config = CalibrationConfig {
            hazard_transform: true,
            ..CalibrationConfig::default()
        };
        let hazard = calibrate_year(&obs(share, 50.0, 200.0), &config).unwrap();
        assert!(hazard.coeffs.reset_rate > plain.coeffs.reset_rate);
        for fit in [&plain, &hazard] {
            let s = fit.params.stationary().top_share(0.01).unwrap();
            assert!((s - share).abs() < 1e-9);
        }
    }
}
