//! Monte Carlo cross-checks for the closed-form results.
//!
//! Every estimator here reaches the same quantities as the analytic modules
//! by a different route — direct simulation of the reset-diffusion — so the
//! two can be compared in tests without shared assumptions beyond the model
//! itself.
//!
//! Randomness is drawn from counter-based per-path streams: path `i` of a
//! run with seed `s` always sees the same values, no matter how work is
//! split across threads. Combined with reductions that run in path order,
//! every estimate is byte-identical across runs and thread counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mfpt::mfpt_levels;
use crate::model::ModelParams;

/// Paths per histogram block in [`empirical_tv`]; blocks accumulate integer
/// counts that are then summed in block order.
const TV_BLOCK: usize = 4096;

/// Truncated-path fraction above which first-passage estimates carry a
/// warning about downward bias.
const TRUNCATION_WARN_FRACTION: f64 = 1e-4;

/// Controls for path simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of independent paths.
    pub n_paths: usize,
    /// Euler step for first-passage simulation (years).
    pub dt: f64,
    /// Seed of the per-path random streams.
    pub seed: u64,
    /// Apply the Brownian-bridge correction for barrier crossings inside a
    /// step. Without it, first-passage times are systematically late.
    pub bridge_correction: bool,
    /// Hard cap on simulated first-passage times (years); `None` uses fifty
    /// times the analytic mean. Paths still running at the cap are counted
    /// at the cap and reported via `truncated_fraction`.
    pub fpt_horizon_cap: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            dt: 1e-2,
            seed: 0,
            bridge_correction: true,
            fpt_horizon_cap: None,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidParams("need at least one path".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "step size must be positive, got {}",
                self.dt
            )));
        }
        if let Some(cap) = self.fpt_horizon_cap {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "horizon cap must be positive, got {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// A simulation estimate with its sampling uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub estimate: f64,
    /// Standard error of the mean over paths.
    pub standard_error: f64,
    /// Paths contributing to the estimate.
    pub n_effective: usize,
    /// Fraction of paths stopped at the horizon cap (first-passage only).
    pub truncated_fraction: f64,
    pub warnings: Vec<String>,
}

/// Empirical total-variation distance to the stationary law over a set of
/// observation times, with the resolution-limited noise floor.
#[derive(Debug, Clone, PartialEq)]
pub struct TvCurve {
    pub times: Vec<f64>,
    pub tv: Vec<f64>,
    /// Expected total-variation reading between two ideal samples of this
    /// size — the level below which the estimate is pure binning noise.
    pub noise_floor: Vec<f64>,
    /// Freedman-Diaconis width from the analytic interquartile range.
    pub bin_width: f64,
    /// Histogram bins, including one underflow and one overflow bin.
    pub n_bins: usize,
}

fn stream_rng(seed: u64, path: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Draws incomes from the long-run distribution by running each path from
/// the reset level for `burn_in` years and sampling exactly at that horizon:
/// reset epochs are generated from the exponential clock, and the diffusion
/// over the final incomplete inter-reset interval collapses to one Gaussian
/// draw. The residual initialization bias is `exp(-r * burn_in)`, so at
/// least ten expected resets are required.
pub fn sample_stationary(
    params: &ModelParams,
    n_paths: usize,
    seed: u64,
    burn_in: f64,
) -> Result<Vec<f64>> {
    if n_paths == 0 {
        return Err(Error::InvalidParams("need at least one path".into()));
    }
    let coeffs = params.derive();
    let (v, d, r) = (coeffs.log_drift, coeffs.diffusion, coeffs.reset_rate);
    if !(burn_in.is_finite() && burn_in * r >= 10.0) {
        return Err(Error::InvalidParams(format!(
            "burn-in of {burn_in} years gives only {:.2} expected resets; at least 10 are \
             needed for the start to be forgotten",
            burn_in * r
        )));
    }
    let exp = Exp::new(r).expect("positive reset rate");
    let x0 = params.reset_level;
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = stream_rng(seed, path);
            let mut last_reset = 0.0;
            loop {
                let next = last_reset + exp.sample(&mut rng);
                if next > burn_in {
                    break;
                }
                last_reset = next;
            }
            let age = burn_in - last_reset;
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = v * age + (2.0 * d * age).sqrt() * z;
            x0 * y.exp()
        })
        .collect())
}

/// Share of total income held by the top `p` fraction of a sample. The top
/// group size is `round(p * n)` clamped to at least one member.
pub fn empirical_top_share(sample: &[f64], p: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!(
            "top fraction must lie in (0, 1], got {p}"
        )));
    }
    if sample.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Domain(
            "sample contains negative or non-finite incomes".into(),
        ));
    }
    let n = sample.len();
    let k = ((p * n as f64).round() as usize).clamp(1, n);
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite incomes"));
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(Error::Domain("sample has zero total income".into()));
    }
    Ok(sorted[..k].iter().sum::<f64>() / total)
}

/// Mean first-passage time from `x_start` up to `x_target`, estimated from
/// simulated paths with exact handling of reset epochs (the Euler step is
/// shortened to land on each reset) and, optionally, a Brownian-bridge
/// correction for crossings inside a step.
///
/// Domain rules match the analytic mean: the target must sit at or above
/// the reset level and at or above the start.
pub fn empirical_mfpt(
    params: &ModelParams,
    x_start: f64,
    x_target: f64,
    config: &SimConfig,
) -> Result<SimResult> {
    config.validate()?;
    let analytic = mfpt_levels(params, x_start, x_target)?;
    let cap = match config.fpt_horizon_cap {
        Some(c) => c,
        // The passage-time tail decays like exp(-r t), so fifty analytic
        // means truncate a vanishing fraction of paths.
        None => (50.0 * analytic).max(1.0),
    };
    let coeffs = params.derive();
    let (v, d, r) = (coeffs.log_drift, coeffs.diffusion, coeffs.reset_rate);
    let y_start = (x_start / params.reset_level).ln();
    let target = (x_target / params.reset_level).ln();
    let exp = Exp::new(r).expect("positive reset rate");
    let dt = config.dt;
    let bridge = config.bridge_correction;

    let outcomes: Vec<(f64, bool)> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = stream_rng(config.seed, path);
            if y_start >= target {
                return (0.0, false);
            }
            let mut y = y_start;
            let mut t = 0.0;
            let mut next_reset = exp.sample(&mut rng);
            loop {
                if t >= cap {
                    return (cap, true);
                }
                let step_end = (t + dt).min(next_reset).min(cap);
                let h = step_end - t;
                if h > 0.0 {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let y_new = y + v * h + (2.0 * d * h).sqrt() * z;
                    if y_new >= target {
                        return (step_end, false);
                    }
                    if bridge {
                        // Crossing probability of a Brownian bridge with
                        // variance rate 2D pinned below the barrier at both
                        // ends: exp(-(L-y0)(L-y1) / (D h)).
                        let p_cross = (-(target - y) * (target - y_new) / (d * h)).exp();
                        if rng.random::<f64>() < p_cross {
                            return (step_end, false);
                        }
                    }
                    y = y_new;
                }
                t = step_end;
                if t == next_reset {
                    y = 0.0;
                    if target <= 0.0 {
                        // Target at the reset level: the jump itself lands on it.
                        return (t, false);
                    }
                    next_reset = t + exp.sample(&mut rng);
                }
            }
        })
        .collect();

    let n = outcomes.len();
    let truncated = outcomes.iter().filter(|(_, trunc)| *trunc).count();
    let mean = outcomes.iter().map(|(t, _)| t).sum::<f64>() / n as f64;
    let variance = if n > 1 {
        outcomes
            .iter()
            .map(|(t, _)| (t - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64
    } else {
        0.0
    };
    let truncated_fraction = truncated as f64 / n as f64;
    let mut warnings = Vec::new();
    if truncated_fraction > TRUNCATION_WARN_FRACTION {
        warnings.push(format!(
            "{truncated} of {n} paths were stopped at the {cap:.3}-year horizon and counted \
             at the cap; the mean first-passage estimate is biased low"
        ));
    }
    Ok(SimResult {
        estimate: mean,
        standard_error: (variance / n as f64).sqrt(),
        n_effective: n,
        truncated_fraction,
        warnings,
    })
}

/// Empirical total-variation distance between the simulated law of log
/// income at each requested time and the stationary law.
///
/// Sampling is exact in distribution: each path keeps one sequence of reset
/// epochs, and at each observation time the diffusion since the last reset
/// collapses to a single Gaussian draw, so there is no time-stepping error.
/// The histogram uses a Freedman-Diaconis width computed from the analytic
/// interquartile range, and counts are accumulated as integers in
/// fixed-size path blocks so the result does not depend on thread count.
pub fn empirical_tv(params: &ModelParams, times: &[f64], config: &SimConfig) -> Result<TvCurve> {
    config.validate()?;
    if times.is_empty() {
        return Err(Error::Domain("no observation times given".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Domain(
            "observation times must be non-negative and finite".into(),
        ));
    }
    let coeffs = params.derive();
    let (v, d, r) = (coeffs.log_drift, coeffs.diffusion, coeffs.reset_rate);
    let stat = coeffs.stationary(1.0)?;
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let n = config.n_paths;

    let iqr = stat.log_quantile(0.75)? - stat.log_quantile(0.25)?;
    let bin_width = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
    let sigma = (2.0 * d * t_max).sqrt();
    let lo = stat.log_quantile(1e-6)? - 6.0 * sigma + (v * t_max).min(0.0);
    let hi = stat.log_quantile(1.0 - 1e-6)? + 6.0 * sigma + (v * t_max).max(0.0);
    let interior = ((hi - lo) / bin_width).ceil() as usize;
    let n_bins = interior + 2;

    // Stationary mass per bin, computed from survival differences so that
    // deep-tail bins keep full relative precision.
    let mut stat_mass = vec![0.0f64; n_bins];
    stat_mass[0] = 1.0 - stat.log_survival(lo);
    for k in 0..interior {
        let a = lo + k as f64 * bin_width;
        let b = lo + (k + 1) as f64 * bin_width;
        stat_mass[k + 1] = stat.log_survival(a) - stat.log_survival(b);
    }
    stat_mass[n_bins - 1] = stat.log_survival(lo + interior as f64 * bin_width);

    let exp = Exp::new(r).expect("positive reset rate");
    let n_blocks = n.div_ceil(TV_BLOCK);
    let block_hists: Vec<Vec<Vec<u64>>> = (0..n_blocks)
        .into_par_iter()
        .map(|blk| {
            let mut hist = vec![vec![0u64; n_bins]; times.len()];
            let start = blk * TV_BLOCK;
            let end = ((blk + 1) * TV_BLOCK).min(n);
            for path in start..end {
                let mut rng = stream_rng(config.seed, path as u64);
                let mut resets = Vec::new();
                let mut t_acc = exp.sample(&mut rng);
                while t_acc <= t_max {
                    resets.push(t_acc);
                    t_acc += exp.sample(&mut rng);
                }
                for (j, &t) in times.iter().enumerate() {
                    let before = resets.partition_point(|&rt| rt <= t);
                    let age = if before == 0 {
                        t
                    } else {
                        t - resets[before - 1]
                    };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let y = v * age + (2.0 * d * age).sqrt() * z;
                    let bin = if y < lo {
                        0
                    } else {
                        (((y - lo) / bin_width) as usize + 1).min(n_bins - 1)
                    };
                    hist[j][bin] += 1;
                }
            }
            hist
        })
        .collect();

    let mut totals = vec![vec![0u64; n_bins]; times.len()];
    for block in &block_hists {
        for (j, row) in block.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                totals[j][k] += c;
            }
        }
    }

    // E|Binomial(n, p)/n - p| for each bin under perfect sampling.
    let floor_value: f64 = 0.5
        * stat_mass
            .iter()
            .map(|&p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n as f64)).sqrt())
            .sum::<f64>();

    let tv: Vec<f64> = totals
        .iter()
        .map(|row| {
            0.5 * row
                .iter()
                .zip(&stat_mass)
                .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
                .sum::<f64>()
        })
        .collect();

    Ok(TvCurve {
        times: times.to_vec(),
        tv,
        noise_floor: vec![floor_value; times.len()],
        bin_width,
        n_bins,
    })
}

/// Kolmogorov-Smirnov statistic between a sample and a reference CDF,
/// `sup_x |F_n(x) - F(x)|` evaluated at the order statistics from both
/// sides of each step.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("sample contains non-finite values".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = sorted.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        ks = ks.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(ks)
}
