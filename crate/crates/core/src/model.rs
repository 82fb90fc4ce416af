//! Income process and its stationary law.
//!
//! Income grows multiplicatively between job-reset events: `dX = drift*X dt +
//! volatility*X dW`, and at Poisson rate `reset_rate` the level jumps back to
//! `reset_level`. In log space `y = ln(x / reset_level)` this is a drifted
//! Brownian motion with restarts at the origin, whose stationary density is a
//! two-sided exponential
//!
//! ```text
//! p(y) = ab/(a+b) * exp(-a*y)   for y >= 0
//! p(y) = ab/(a+b) * exp( b*y)   for y <  0
//! ```
//!
//! so income itself follows a double Pareto law with upper tail exponent `a`
//! and lower tail exponent `b`. With v = drift - volatility^2/2 (log drift),
//! D = volatility^2/2 (log diffusion) and lambda = sqrt(v^2 + 4*D*r):
//!
//! ```text
//! a = (lambda - v) / (2D)      b = (lambda + v) / (2D)
//! a*b = r/D                    b - a = v/D
//! ```

use crate::error::{Error, Result};

/// Income process parameters in natural (income) units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Proportional income growth rate between resets (per year).
    pub drift: f64,
    /// Proportional income volatility between resets (per sqrt year).
    pub volatility: f64,
    /// Poisson rate of reset events (per year).
    pub reset_rate: f64,
    /// Income level the process restarts from; all incomes are expressed in
    /// multiples of this level.
    pub reset_level: f64,
}

impl ModelParams {
    /// Parameters with the reset level fixed at 1, so incomes are read as
    /// multiples of the reset level.
    pub fn new(drift: f64, volatility: f64, reset_rate: f64) -> Result<Self> {
        Self::with_reset_level(drift, volatility, reset_rate, 1.0)
    }

    pub fn with_reset_level(
        drift: f64,
        volatility: f64,
        reset_rate: f64,
        reset_level: f64,
    ) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidParams(format!(
                "drift must be finite, got {drift}"
            )));
        }
        if !(volatility.is_finite() && volatility > 0.0) {
            return Err(Error::InvalidParams(format!(
                "volatility must be positive and finite, got {volatility}"
            )));
        }
        if !(reset_rate.is_finite() && reset_rate > 0.0) {
            return Err(Error::InvalidParams(format!(
                "reset rate must be positive and finite, got {reset_rate}"
            )));
        }
        if !(reset_level.is_finite() && reset_level > 0.0) {
            return Err(Error::InvalidParams(format!(
                "reset level must be positive and finite, got {reset_level}"
            )));
        }
        Ok(Self {
            drift,
            volatility,
            reset_rate,
            reset_level,
        })
    }

    /// Log-space coefficients and stationary tail exponents.
    pub fn derive(&self) -> DerivedCoeffs {
        let v = self.drift - 0.5 * self.volatility * self.volatility;
        let d = 0.5 * self.volatility * self.volatility;
        let lambda = (v * v + 4.0 * d * self.reset_rate).sqrt();
        DerivedCoeffs {
            log_drift: v,
            diffusion: d,
            reset_rate: self.reset_rate,
            lambda,
            tail_upper: (lambda - v) / (2.0 * d),
            tail_lower: (lambda + v) / (2.0 * d),
        }
    }

    /// Stationary income distribution implied by these parameters.
    pub fn stationary(&self) -> StationaryDistribution {
        let c = self.derive();
        StationaryDistribution {
            tail_upper: c.tail_upper,
            tail_lower: c.tail_lower,
            reset_level: self.reset_level,
        }
    }
}

/// Log-space coefficients derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoeffs {
    /// Drift of log income between resets, v = drift - volatility^2/2.
    pub log_drift: f64,
    /// Log-income diffusion coefficient D = volatility^2/2; the Gaussian
    /// variance accumulated over an interval dt is 2*D*dt.
    pub diffusion: f64,
    /// Reset rate, carried over unchanged.
    pub reset_rate: f64,
    /// lambda = sqrt(log_drift^2 + 4*diffusion*reset_rate); equals
    /// diffusion * (tail_upper + tail_lower).
    pub lambda: f64,
    /// Upper income tail exponent a.
    pub tail_upper: f64,
    /// Lower income tail exponent b.
    pub tail_lower: f64,
}

impl DerivedCoeffs {
    /// Coefficients for the reset-free process (`reset_rate = 0`). There is
    /// no stationary law in this case; the transient density stays a plain
    /// Gaussian, which is useful as a reference in tests.
    pub fn reset_free(log_drift: f64, diffusion: f64) -> Result<Self> {
        if !log_drift.is_finite() {
            return Err(Error::InvalidParams(format!(
                "log drift must be finite, got {log_drift}"
            )));
        }
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return Err(Error::InvalidParams(format!(
                "diffusion must be positive and finite, got {diffusion}"
            )));
        }
        let lambda = log_drift.abs();
        Ok(Self {
            log_drift,
            diffusion,
            reset_rate: 0.0,
            lambda,
            tail_upper: (lambda - log_drift) / (2.0 * diffusion),
            tail_lower: (lambda + log_drift) / (2.0 * diffusion),
        })
    }

    /// Stationary distribution with the given reset level.
    pub fn stationary(&self, reset_level: f64) -> Result<StationaryDistribution> {
        StationaryDistribution::new(self.tail_upper, self.tail_lower, reset_level)
    }
}

/// Stationary double Pareto income distribution.
///
/// Characterized by the two tail exponents; `reset_level` only sets the scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryDistribution {
    tail_upper: f64,
    tail_lower: f64,
    reset_level: f64,
}

impl StationaryDistribution {
    pub fn new(tail_upper: f64, tail_lower: f64, reset_level: f64) -> Result<Self> {
        if !(tail_upper.is_finite() && tail_upper > 0.0) {
            return Err(Error::InvalidParams(format!(
                "upper tail exponent must be positive and finite, got {tail_upper}"
            )));
        }
        if !(tail_lower.is_finite() && tail_lower > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lower tail exponent must be positive and finite, got {tail_lower}"
            )));
        }
        if !(reset_level.is_finite() && reset_level > 0.0) {
            return Err(Error::InvalidParams(format!(
                "reset level must be positive and finite, got {reset_level}"
            )));
        }
        Ok(Self {
            tail_upper,
            tail_lower,
            reset_level,
        })
    }

    pub fn tail_upper(&self) -> f64 {
        self.tail_upper
    }

    pub fn tail_lower(&self) -> f64 {
        self.tail_lower
    }

    pub fn reset_level(&self) -> f64 {
        self.reset_level
    }

    fn normalization(&self) -> f64 {
        let (a, b) = (self.tail_upper, self.tail_lower);
        a * b / (a + b)
    }

    /// Density of log income y = ln(x / reset_level). Defined on all of R.
    pub fn log_pdf(&self, y: f64) -> f64 {
        let c = self.normalization();
        if y >= 0.0 {
            c * (-self.tail_upper * y).exp()
        } else {
            c * (self.tail_lower * y).exp()
        }
    }

    /// P(Y > y) for log income.
    pub fn log_survival(&self, y: f64) -> f64 {
        let (a, b) = (self.tail_upper, self.tail_lower);
        if y >= 0.0 {
            b / (a + b) * (-a * y).exp()
        } else {
            1.0 - a / (a + b) * (b * y).exp()
        }
    }

    /// Quantile of log income at probability `p` in (0, 1).
    pub fn log_quantile(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "quantile probability must lie in (0, 1), got {p}"
            )));
        }
        let (a, b) = (self.tail_upper, self.tail_lower);
        let p_at_origin = a / (a + b);
        if p >= p_at_origin {
            // Invert the upper survival branch: (1-p) = b/(a+b) * exp(-a*y).
            Ok(-((1.0 - p) * (a + b) / b).ln() / a)
        } else {
            Ok((p * (a + b) / a).ln() / b)
        }
    }

    /// Income density at `x > 0`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let y = self.log_of(x)?;
        Ok(self.log_pdf(y) / x)
    }

    /// P(X > x) for `x > 0`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        let y = self.log_of(x)?;
        Ok(self.log_survival(y))
    }

    /// P(X <= x) for `x > 0`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.survival(x)?)
    }

    /// Income quantile at probability `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.reset_level * self.log_quantile(p)?.exp())
    }

    /// Mean income. Finite only for tail exponents a > 1.
    pub fn mean(&self) -> Result<f64> {
        let (a, b) = (self.tail_upper, self.tail_lower);
        if a <= 1.0 {
            return Err(Error::HeavyTail(format!(
                "mean income diverges for upper tail exponent a <= 1, got a = {a}"
            )));
        }
        Ok(self.reset_level * a * b / ((a - 1.0) * (b + 1.0)))
    }

    /// Share of total income held by the top `p` fraction of the population,
    /// `0 < p <= 1`. Requires a > 1 so that total income is finite.
    ///
    /// The two branches meet where the top-p threshold crosses the reset
    /// level, at p = b/(a+b), and agree there.
    pub fn top_share(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0 && p <= 1.0) {
            return Err(Error::Domain(format!(
                "top share fraction must lie in (0, 1], got {p}"
            )));
        }
        let (a, b) = (self.tail_upper, self.tail_lower);
        if a <= 1.0 {
            return Err(Error::HeavyTail(format!(
                "top income share requires upper tail exponent a > 1, got a = {a}"
            )));
        }
        let q = a + b;
        if p <= b / q {
            // Threshold at or above the reset level: exp(-a*y_p) = p*q/b.
            Ok((b + 1.0) / q * (p * q / b).powf((a - 1.0) / a))
        } else {
            // Threshold below the reset level: exp(b*y_p) = (1-p)*q/a.
            let e_b_yp = (1.0 - p) * q / a;
            Ok(1.0 - (a - 1.0) / q * e_b_yp.powf((b + 1.0) / b))
        }
    }

    fn log_of(&self, x: f64) -> Result<f64> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Domain(format!(
                "income must be positive and finite, got {x}"
            )));
        }
        Ok((x / self.reset_level).ln())
    }
}
