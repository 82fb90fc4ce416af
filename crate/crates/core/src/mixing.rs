//! Convergence of the income distribution to its stationary law.
//!
//! Started at the reset level, the log-income density at time `t` has the
//! renewal form
//!
//! ```text
//! P(y, t) = exp(-r*t) G(y, t) + r * INT_0^t exp(-r*tau) G(y, tau) dtau
//! ```
//!
//! where `G(y, tau)` is the Gaussian with mean `v*tau` and variance
//! `2*D*tau`; as `t -> inf` this converges to the stationary two-sided
//! exponential. Distance to stationarity is measured in total variation,
//! `tv(t) = 1/2 INT |P(y, t) - p_st(y)| dy`, which carries the analytic
//! envelope `tv(t) <= exp(-r*t)`: the two laws can differ only on the event
//! that no reset has happened yet.
//!
//! The time integral is evaluated by adaptive quadrature in the substituted
//! variable `u = sqrt(tau)`, which removes the near-delta behaviour of the
//! Gaussian at `tau -> 0` (the integrand in `u` is bounded and smooth).
//! Time stepping a discretized transport equation is deliberately avoided:
//! there are no stability constraints this way and accuracy is governed by a
//! single tolerance.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DerivedCoeffs, ModelParams};
use crate::numeric::{adaptive_simpson, gaussian_pdf};

/// Tuning for total-variation evaluation and the mixing-time search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingConfig {
    /// Total-variation threshold defining the mixing time.
    pub epsilon: f64,
    /// Number of log-income grid points (kept odd so each side of the
    /// origin carries whole Simpson cells).
    pub grid_points: usize,
    /// Stationary tail mass clipped off each end of the grid.
    pub quantile_clip: f64,
    /// Grid widening beyond the stationary quantile span, in units of the
    /// transient standard deviation at the evaluation horizon.
    pub widen_stds: f64,
    /// Renewal integral truncation: contributions with reset weight
    /// `exp(-r*tau)` below this are dropped.
    pub tau_cutoff_weight: f64,
    /// Coarse time-scan step for the mixing-time search (years).
    pub scan_step: f64,
    /// Bisection width for the mixing time (years).
    pub time_tolerance: f64,
    /// Probability-mass tolerance for grid quadrature.
    pub quadrature_tolerance: f64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            grid_points: 2001,
            quantile_clip: 1e-6,
            widen_stds: 6.0,
            tau_cutoff_weight: 1e-12,
            scan_step: 0.05,
            time_tolerance: 1e-3,
            quadrature_tolerance: 1e-6,
        }
    }
}

impl MixingConfig {
    /// Threshold preset epsilon = 1/e, the customary relaxation-time level.
    pub fn epsilon_one_over_e() -> f64 {
        std::f64::consts::E.recip()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.grid_points < 9 {
            return Err(Error::InvalidParams(format!(
                "grid needs at least 9 points, got {}",
                self.grid_points
            )));
        }
        if !(self.quantile_clip > 0.0 && self.quantile_clip < 0.1) {
            return Err(Error::InvalidParams(format!(
                "quantile clip must lie in (0, 0.1), got {}",
                self.quantile_clip
            )));
        }
        if !(self.widen_stds >= 0.0 && self.widen_stds.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "grid widening must be non-negative, got {}",
                self.widen_stds
            )));
        }
        if !(self.tau_cutoff_weight > 0.0 && self.tau_cutoff_weight < 1.0) {
            return Err(Error::InvalidParams(format!(
                "tau cutoff weight must lie in (0, 1), got {}",
                self.tau_cutoff_weight
            )));
        }
        if !(self.scan_step > 0.0 && self.scan_step.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "scan step must be positive, got {}",
                self.scan_step
            )));
        }
        if !(self.time_tolerance > 0.0 && self.time_tolerance.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "time tolerance must be positive, got {}",
                self.time_tolerance
            )));
        }
        if !(self.quadrature_tolerance > 0.0 && self.quadrature_tolerance.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "quadrature tolerance must be positive, got {}",
                self.quadrature_tolerance
            )));
        }
        Ok(())
    }
}

/// Transient log-income density `P(y, t)` for the process started at the
/// reset level, `t > 0`. A zero reset rate is admissible here and yields the
/// plain Gaussian propagator.
pub fn transient_pdf(coeffs: &DerivedCoeffs, y: f64, t: f64) -> Result<f64> {
    transient_pdf_tol(coeffs, y, t, 1e-10, 1e-12)
}

fn transient_pdf_tol(
    coeffs: &DerivedCoeffs,
    y: f64,
    t: f64,
    tol: f64,
    cutoff_weight: f64,
) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    if !y.is_finite() {
        return Err(Error::Domain(format!("log income must be finite, got {y}")));
    }
    let (v, d, r) = (coeffs.log_drift, coeffs.diffusion, coeffs.reset_rate);
    let direct = (-r * t).exp() * gaussian_pdf(y, v * t, 2.0 * d * t);
    if r == 0.0 {
        return Ok(direct);
    }
    let tau_max = t.min(-cutoff_weight.ln() / r);
    let u_max = tau_max.sqrt();
    let f = |u: f64| renewal_integrand(v, d, r, y, u);
    let integral = adaptive_simpson(&f, 0.0, u_max, tol / r, 8);
    Ok(direct + r * integral)
}

/// `2u * exp(-r*u^2) * G(y, u^2)`, the renewal integrand after `tau = u^2`.
/// Bounded at the origin: the Jacobian cancels the `1/sqrt(tau)` of the
/// Gaussian normalization.
fn renewal_integrand(v: f64, d: f64, r: f64, y: f64, u: f64) -> f64 {
    if u == 0.0 {
        return if y == 0.0 {
            1.0 / (std::f64::consts::PI * d).sqrt()
        } else {
            0.0
        };
    }
    let tau = u * u;
    let z = y - v * tau;
    (-r * tau - z * z / (4.0 * d * tau)).exp() / (std::f64::consts::PI * d).sqrt()
}

/// Uniform-per-side log-income grid with a node pinned at the origin.
///
/// The stationary density and the renewal integral both have a derivative
/// kink at `y = 0`; keeping the origin on a Simpson cell boundary preserves
/// the quadrature order across it.
#[derive(Debug, Clone)]
pub struct LogGrid {
    points: Vec<f64>,
    zero_index: usize,
}

impl LogGrid {
    /// Grid spanning the stationary quantiles `clip .. 1-clip`, widened by
    /// `widen_stds` transient standard deviations (plus drift reach) at the
    /// given horizon.
    pub fn build(coeffs: &DerivedCoeffs, config: &MixingConfig, horizon: f64) -> Result<Self> {
        config.validate()?;
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::Domain(format!(
                "horizon must be non-negative, got {horizon}"
            )));
        }
        let stat = coeffs.stationary(1.0)?;
        let q_lo = stat.log_quantile(config.quantile_clip)?;
        let q_hi = stat.log_quantile(1.0 - config.quantile_clip)?;
        let sigma = (2.0 * coeffs.diffusion * horizon).sqrt();
        let reach = coeffs.log_drift * horizon;
        let lo = q_lo - config.widen_stds * sigma + reach.min(0.0);
        let hi = q_hi + config.widen_stds * sigma + reach.max(0.0);
        debug_assert!(lo < 0.0 && hi > 0.0);

        let total_panels = (config.grid_points | 1) - 1;
        let left_share = -lo / (hi - lo);
        let mut left_panels = ((total_panels as f64 * left_share).round() as usize) & !1;
        left_panels = left_panels.clamp(2, total_panels - 2);
        let right_panels = total_panels - left_panels;

        let mut points = Vec::with_capacity(total_panels + 1);
        let h_left = -lo / left_panels as f64;
        for i in 0..left_panels {
            points.push(lo + i as f64 * h_left);
        }
        points.push(0.0);
        let h_right = hi / right_panels as f64;
        for j in 1..=right_panels {
            points.push(j as f64 * h_right);
        }
        Ok(Self {
            points,
            zero_index: left_panels,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn span(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }

    /// Composite Simpson integral of grid values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.points.len());
        self.simpson_side(values, 0, self.zero_index)
            + self.simpson_side(values, self.zero_index, self.points.len() - 1)
    }

    fn simpson_side(&self, values: &[f64], i0: usize, i1: usize) -> f64 {
        let panels = i1 - i0;
        let h = (self.points[i1] - self.points[i0]) / panels as f64;
        let mut sum = 0.0;
        let mut k = i0;
        while k + 2 <= i1 {
            sum += h / 3.0 * (values[k] + 4.0 * values[k + 1] + values[k + 2]);
            k += 2;
        }
        sum
    }

    /// Integral of |values| where each Simpson cell is replaced by its
    /// quadratic interpolant and the absolute value is integrated exactly,
    /// splitting at the interpolant's sign changes. This keeps accuracy at
    /// the unpredictable crossings of a signed difference of densities.
    pub fn integrate_abs(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.points.len());
        self.abs_side(values, 0, self.zero_index)
            + self.abs_side(values, self.zero_index, self.points.len() - 1)
    }

    fn abs_side(&self, values: &[f64], i0: usize, i1: usize) -> f64 {
        let panels = i1 - i0;
        let h = (self.points[i1] - self.points[i0]) / panels as f64;
        let mut sum = 0.0;
        let mut k = i0;
        while k + 2 <= i1 {
            sum += abs_quadratic_cell(values[k], values[k + 1], values[k + 2], h);
            k += 2;
        }
        sum
    }
}

/// Exact integral of |quadratic through (d0, d1, d2) on nodes (-h, 0, h)|.
fn abs_quadratic_cell(d0: f64, d1: f64, d2: f64, h: f64) -> f64 {
    // q(s) = a*s^2 + b*s + c on s in [-1, 1], y = s*h.
    let a = 0.5 * (d2 - 2.0 * d1 + d0);
    let b = 0.5 * (d2 - d0);
    let c = d1;
    let antiderivative = |s: f64| ((a / 3.0 * s + b / 2.0) * s + c) * s;
    let mut cuts = [0.0f64; 2];
    let mut n_cuts = 0;
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 {
        if b != 0.0 {
            let root = -c / b;
            if root > -1.0 && root < 1.0 {
                cuts[0] = root;
                n_cuts = 1;
            }
        }
    } else if disc > 0.0 {
        // Citardauq pairing keeps both roots accurate when b dominates.
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
        for root in [r1.min(r2), r1.max(r2)] {
            if root > -1.0 && root < 1.0 {
                cuts[n_cuts] = root;
                n_cuts += 1;
            }
        }
        if n_cuts == 2 && cuts[0] == cuts[1] {
            n_cuts = 1;
        }
    }
    let mut total = 0.0;
    let mut left = -1.0;
    let mut acc_left = antiderivative(-1.0);
    for &cut in &cuts[..n_cuts] {
        let acc_cut = antiderivative(cut);
        total += (acc_cut - acc_left).abs();
        left = cut;
        acc_left = acc_cut;
    }
    let _ = left;
    total += (antiderivative(1.0) - acc_left).abs();
    total * h
}

/// Total-variation distance between the transient law at time `t` and the
/// stationary law, on a grid sized for `t`. Defined as exactly 1 at `t = 0`.
///
/// Values are clipped to [0, 1]; for times so small that the transient is
/// narrower than the grid spacing the distance saturates at 1, which is also
/// its true order of magnitude there.
pub fn tv_distance(coeffs: &DerivedCoeffs, t: f64, config: &MixingConfig) -> Result<f64> {
    config.validate()?;
    if coeffs.reset_rate <= 0.0 {
        return Err(Error::InvalidParams(
            "total variation to stationarity requires a positive reset rate".into(),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let grid = LogGrid::build(coeffs, config, t)?;
    tv_on_grid(coeffs, t, &grid, config)
}

fn tv_on_grid(
    coeffs: &DerivedCoeffs,
    t: f64,
    grid: &LogGrid,
    config: &MixingConfig,
) -> Result<f64> {
    let stat = coeffs.stationary(1.0)?;
    let point_tol = config.quadrature_tolerance / (4.0 * grid.span());
    let deltas = grid
        .points()
        .par_iter()
        .map(|&y| {
            transient_pdf_tol(coeffs, y, t, point_tol, config.tau_cutoff_weight)
                .map(|p| p - stat.log_pdf(y))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((0.5 * grid.integrate_abs(&deltas)).clamp(0.0, 1.0))
}

/// Smallest time (to within `time_tolerance`) at which the total-variation
/// distance to stationarity falls to `epsilon`, found by a coarse forward
/// scan followed by bisection on a fixed grid.
///
/// The analytic envelope guarantees the result is at most
/// `ln(1/epsilon)/reset_rate + time_tolerance`; the scan aborts with
/// [`Error::NotConverged`] if it runs past ten times that bound, which can
/// only happen when grid quadrature is too coarse for the requested epsilon.
pub fn mixing_time(params: &ModelParams, config: &MixingConfig) -> Result<f64> {
    config.validate()?;
    let coeffs = params.derive();
    let bound = (1.0 / config.epsilon).ln() / coeffs.reset_rate;
    let scan_limit = 10.0 * bound;
    let grid = LogGrid::build(&coeffs, config, bound + config.scan_step)?;

    let tv_at = |t: f64| tv_on_grid(&coeffs, t, &grid, config);

    let mut lo = 0.0;
    let mut hi = None;
    let mut k: u64 = 1;
    loop {
        let t = k as f64 * config.scan_step;
        if tv_at(t)? <= config.epsilon {
            hi = Some(t);
            break;
        }
        lo = t;
        if t > scan_limit {
            break;
        }
        k += 1;
    }
    let Some(mut hi) = hi else {
        return Err(Error::NotConverged(format!(
            "total variation stayed above epsilon = {} beyond t = {:.3} years, ten times the \
             analytic bound; the grid is too coarse for this epsilon",
            config.epsilon, scan_limit
        )));
    };
    while hi - lo > config.time_tolerance {
        let mid = 0.5 * (lo + hi);
        if tv_at(mid)? <= config.epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_a() -> ModelParams {
        ModelParams::new(0.105, 0.2, 0.25).unwrap()
    }

    #[test]
    fn reset_free_transient_is_gaussian() {
        let c = DerivedCoeffs::reset_free(0.085, 0.02).unwrap();
        for (y, t) in [(0.0, 1.0), (0.3, 0.5), (-0.2, 2.0), (1.0, 4.0)] {
            let got = transient_pdf(&c, y, t).unwrap();
            let want = gaussian_pdf(y, 0.085 * t, 0.04 * t);
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "y={y} t={t}: {got} vs {want}"
            );
        }
    }

    /// Reference values computed from the error-function closed form of the
    /// renewal integral (independent of the quadrature route used here).
    #[test]
    fn transient_pdf_reference_points() {
        let c = set_a().derive();
        for (y, t, want) in [
            (0.0, 0.5, 3.04676131356),
            (0.3, 1.5, 1.09323556541),
            (-0.4, 2.0, 0.145704409742),
            (1.2, 3.0, 0.0146860600466),
            (0.085, 1.0, 2.1189978693),
        ] {
            let got = transient_pdf(&c, y, t).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "P({y}, {t}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn transient_pdf_domain() {
        let c = set_a().derive();
        assert!(matches!(transient_pdf(&c, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            transient_pdf(&c, 0.0, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            transient_pdf(&c, f64::NAN, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn transient_mass_on_grid() {
        let c = set_a().derive();
        let config = MixingConfig::default();
        for t in [0.5, 1.0, 4.0, 20.0] {
            let grid = LogGrid::build(&c, &config, t).unwrap();
            let vals: Vec<f64> = grid
                .points()
                .iter()
                .map(|&y| transient_pdf(&c, y, t).unwrap())
                .collect();
            let mass = grid.integrate(&vals);
            assert!((mass - 1.0).abs() < 1e-6, "t={t}: mass {mass}");
        }
    }

    #[test]
    fn stationary_mass_on_grid() {
        let c = set_a().derive();
        let config = MixingConfig::default();
        let grid = LogGrid::build(&c, &config, 10.0).unwrap();
        let stat = c.stationary(1.0).unwrap();
        let vals: Vec<f64> = grid.points().iter().map(|&y| stat.log_pdf(y)).collect();
        let mass = grid.integrate(&vals);
        // Clip removes 2e-6 of tail mass; Simpson across the pinned kink
        // contributes far less.
        assert!((mass - 1.0).abs() < 3e-6, "mass {mass}");
    }

    #[test]
    fn late_transient_matches_stationary_pointwise() {
        let c = set_a().derive();
        let config = MixingConfig::default();
        let grid = LogGrid::build(&c, &config, 50.0).unwrap();
        let stat = c.stationary(1.0).unwrap();
        for &y in grid.points() {
            let p = transient_pdf(&c, y, 50.0).unwrap();
            assert!(
                (p - stat.log_pdf(y)).abs() < 1e-4,
                "y={y}: transient {p} vs stationary {}",
                stat.log_pdf(y)
            );
        }
    }

    #[test]
    fn tv_at_zero_is_one() {
        let c = set_a().derive();
        assert_eq!(tv_distance(&c, 0.0, &MixingConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn tv_reference_points() {
        // Frozen from the error-function closed form, quadratures to 1e-8.
        let c = set_a().derive();
        let config = MixingConfig::default();
        for (t, want) in [(1.0, 0.31361838), (4.0, 0.094980207), (20.0, 0.00092906467)] {
            let got = tv_distance(&c, t, &config).unwrap();
            assert!((got - want).abs() < 2e-5, "tv({t}) = {got}, want {want}");
        }
    }

    #[test]
    fn tv_envelope_at_20_years() {
        let c = set_a().derive();
        let got = tv_distance(&c, 20.0, &MixingConfig::default()).unwrap();
        assert!(got <= 0.0077, "tv(20) = {got} above envelope slack");
    }

    #[test]
    fn tv_rejects_reset_free() {
        let c = DerivedCoeffs::reset_free(0.085, 0.02).unwrap();
        assert!(matches!(
            tv_distance(&c, 1.0, &MixingConfig::default()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn mixing_time_set_a_relaxation_threshold() {
        let config = MixingConfig::default().with_epsilon(MixingConfig::epsilon_one_over_e());
        let t = mixing_time(&set_a(), &config).unwrap();
        assert!(t > 0.0 && t <= 4.0, "mixing time {t} outside (0, 4]");
        // Reference crossing 0.7228 from the closed-form tv curve.
        assert!((t - 0.723).abs() < 5e-3, "mixing time {t}");
    }

    #[test]
    fn mixing_time_envelope_bound_fast_resets() {
        let params = ModelParams::new(0.105, 0.2, 10.0).unwrap();
        let t = mixing_time(&params, &MixingConfig::default()).unwrap();
        assert!(t <= 20f64.ln() / 10.0 + 1e-3, "mixing time {t} above bound");
        assert!(t > 0.0);
    }

    #[test]
    fn mixing_time_monotone_in_epsilon() {
        let tight = mixing_time(&set_a(), &MixingConfig::default().with_epsilon(0.02)).unwrap();
        let loose = mixing_time(&set_a(), &MixingConfig::default().with_epsilon(0.10)).unwrap();
        assert!(tight > loose, "tight {tight} <= loose {loose}");
    }

    #[test]
    fn not_converged_when_quadrature_floor_exceeds_epsilon() {
        // A huge quadrature tolerance freezes the renewal integral at its
        // coarse initial rule, leaving a bias that grows with the length of
        // the time-integration range and settles near 4e-3. Readings dip to
        // roughly 8e-5 on the way before the bias takes over, so an epsilon
        // below that dip can never be reached and the scan must give up at
        // its limit.
        let mut config = MixingConfig::default().with_epsilon(1e-5);
        config.quadrature_tolerance = 1e9;
        config.grid_points = 201;
        config.scan_step = 2.0;
        let err = mixing_time(&set_a(), &config);
        assert!(matches!(err, Err(Error::NotConverged(_))), "got {err:?}");
    }

    #[test]
    fn config_validation() {
        let bad = MixingConfig::default().with_epsilon(0.0);
        assert!(matches!(bad.validate(), Err(Error::InvalidParams(_))));
        let bad = MixingConfig::default().with_epsilon(1.0);
        assert!(bad.validate().is_err());
        let bad = MixingConfig {
            grid_points: 4,
            ..MixingConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MixingConfig {
            scan_step: -0.05,
            ..MixingConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn abs_cell_splits_sign_change() {
        // Linear function crossing zero at s = 0.5 of the right half-panel:
        // d = (-1, 0, 1) over h = 1 gives integral of |s| on [-1,1] = 1.
        let got = abs_quadratic_cell(-1.0, 0.0, 1.0, 1.0);
        assert!((got - 1.0).abs() < 1e-15);
        // Pure parabola s^2 - 1/4: roots at +-1/2.
        // Integral of |s^2 - 0.25| over [-1, 1] = 0.5.
        let got = abs_quadratic_cell(0.75, -0.25, 0.75, 1.0);
        assert!((got - 0.5).abs() < 1e-15, "got {got}");
        // Sign-definite cell reduces to the plain Simpson value.
        let got = abs_quadratic_cell(1.0, 2.0, 1.5, 0.25);
        let simpson = 0.25 / 3.0 * (1.0 + 8.0 + 1.5);
        assert!((got - simpson).abs() < 1e-15);
    }

    #[test]
    fn grid_pins_origin_between_simpson_cells() {
        let c = set_a().derive();
        let grid = LogGrid::build(&c, &MixingConfig::default(), 4.0).unwrap();
        assert_eq!(grid.points()[grid.zero_index], 0.0);
        assert_eq!(grid.zero_index % 2, 0);
        assert_eq!((grid.points().len() - 1 - grid.zero_index) % 2, 0);
        let lo = grid.points()[0];
        let hi = *grid.points().last().unwrap();
        assert!(lo < 0.0 && hi > 0.0);
    }
}
