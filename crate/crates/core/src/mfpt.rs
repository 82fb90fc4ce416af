//! Mean first-passage times to upper income levels.
//!
//! Between resets, log income is a drifted Brownian motion, for which the
//! Laplace transform of the first-passage density to a level `delta` above
//! the current position is `exp(-kappa(s) * delta)` with
//!
//! ```text
//! kappa(s) = (sqrt(log_drift^2 + 4*diffusion*s) - log_drift) / (2*diffusion)
//! ```
//!
//! Note kappa(reset_rate) equals the upper tail exponent a. Renewal over
//! reset events turns this into a closed form for the mean time to first
//! reach `x_target` starting from `x_start`, valid for upward passages with
//! `x_target` at or above the reset level:
//!
//! ```text
//! T = ((x_target/x0)^a - (x_start/x0)^a) / reset_rate
//! ```

use crate::error::{Error, Result};
use crate::model::{DerivedCoeffs, ModelParams};

/// Laplace transform of the reset-free first-passage density from a log
/// level to one `log_distance` above it, evaluated at `s >= 0`.
pub fn fpt_laplace_kernel(coeffs: &DerivedCoeffs, s: f64, log_distance: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Domain(format!(
            "Laplace variable must be >= 0, got {s}"
        )));
    }
    if !(log_distance.is_finite() && log_distance >= 0.0) {
        return Err(Error::Domain(format!(
            "log distance must be >= 0 for an upward passage, got {log_distance}"
        )));
    }
    Ok((-kappa(coeffs, s) * log_distance).exp())
}

/// The exponent kappa(s) of the first-passage Laplace transform.
///
/// For zero drift and s = 0 this is 0 (certain passage); for negative log
/// drift it stays positive at s = 0, reproducing the escape probability
/// exp(-|v|/D * delta) of a transient passage.
pub(crate) fn kappa(coeffs: &DerivedCoeffs, s: f64) -> f64 {
    let (v, d) = (coeffs.log_drift, coeffs.diffusion);
    ((v * v + 4.0 * d * s).sqrt() - v) / (2.0 * d)
}

/// Mean time for income started at `x_start` to first reach `x_target`.
///
/// Requires `x_target >= reset_level` (the renewal argument restarts every
/// attempt from the reset level, so targets below it are reached trivially
/// at each reset and fall outside this closed form) and
/// `x_start <= x_target` (upward passage only).
pub fn mfpt_levels(params: &ModelParams, x_start: f64, x_target: f64) -> Result<f64> {
    if !(x_start.is_finite() && x_start > 0.0) {
        return Err(Error::Domain(format!(
            "start level must be positive, got {x_start}"
        )));
    }
    if !(x_target.is_finite() && x_target > 0.0) {
        return Err(Error::Domain(format!(
            "target level must be positive, got {x_target}"
        )));
    }
    if x_target < params.reset_level {
        return Err(Error::Domain(format!(
            "target level {x_target} lies below the reset level {}; only upward targets at or \
             above the reset level are admissible",
            params.reset_level
        )));
    }
    if x_start > x_target {
        return Err(Error::Domain(format!(
            "start level {x_start} exceeds target level {x_target}; passage is upward only"
        )));
    }
    let a = params.derive().tail_upper;
    let ratio_t = (x_target / params.reset_level).powf(a);
    let ratio_s = (x_start / params.reset_level).powf(a);
    Ok((ratio_t - ratio_s) / params.reset_rate)
}

/// Mean first-passage time between stationary percentiles.
///
/// Both percentile levels are taken from the stationary law of the process.
/// For levels at or above the reset level the closed form reduces to
/// `T = (b/(a+b)) * (1/(1-p_target) - 1/(1-p_start)) / reset_rate`.
pub fn mfpt_percentiles(params: &ModelParams, p_start: f64, p_target: f64) -> Result<f64> {
    if p_start == p_target {
        return Err(Error::Domain(format!(
            "degenerate percentile pair ({p_start}, {p_target})"
        )));
    }
    if !(p_start > 0.0 && p_start < 1.0 && p_target > 0.0 && p_target < 1.0) {
        return Err(Error::Domain(format!(
            "percentiles must lie in (0, 1), got ({p_start}, {p_target})"
        )));
    }
    if p_start > p_target {
        return Err(Error::Domain(format!(
            "start percentile {p_start} exceeds target percentile {p_target}; passage is upward only"
        )));
    }
    let dist = params.stationary();
    let x_start = dist.quantile(p_start)?;
    let x_target = dist.quantile(p_target)?;
    mfpt_levels(params, x_start, x_target)
}

/// A first-passage question posed either in income levels or in stationary
/// percentiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PassageQuery {
    Levels { start: f64, target: f64 },
    Percentiles { start: f64, target: f64 },
}

/// Mean first-passage time for a [`PassageQuery`], in years.
pub fn mfpt(params: &ModelParams, query: &PassageQuery) -> Result<f64> {
    match *query {
        PassageQuery::Levels { start, target } => mfpt_levels(params, start, target),
        PassageQuery::Percentiles { start, target } => mfpt_percentiles(params, start, target),
    }
}
