//! Settings file and flag resolution.
//!
//! The optional config file holds `key = value` lines (with `#` comments);
//! command-line flags override it. Keys mirror the long flag names.

use crate::args::{EpsilonFlags, EpsilonPreset, ParamFlags};
use mobility_core::ModelParams;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

type Error = Box<dyn std::error::Error>;

/// Keys the settings file may define. Anything else is rejected so typos
/// surface instead of silently falling back to defaults.
const KNOWN_KEYS: &[&str] = &[
    "drift",
    "volatility",
    "reset-rate",
    "reset-level",
    "sigma",
    "epsilon",
    "epsilon-preset",
    "percentile-pairs",
    "hazard-transform",
    "sigma-sweep",
    "format",
    "seed",
    "n-paths",
    "dt",
    "burn-in",
    "times",
    "horizon-cap",
];

#[derive(Debug)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!(
                    "config {} line {}: expected `key = value`, got `{raw}`",
                    path.display(),
                    idx + 1
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(format!(
                    "config {} line {}: unknown key `{key}` (known keys: {})",
                    path.display(),
                    idx + 1,
                    KNOWN_KEYS.join(", ")
                )
                .into());
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(format!(
                    "config {} line {}: key `{key}` given twice",
                    path.display(),
                    idx + 1
                )
                .into());
            }
        }
        Ok(Self { values })
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unknown settings key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: Display,
    {
        match self.get_raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| format!("config key `{key}`: cannot parse `{raw}`: {e}").into()),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, Error> {
        match self.get_raw(key) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(raw) => {
                Err(format!("config key `{key}`: expected true or false, got `{raw}`").into())
            }
        }
    }
}

/// A flag value if given, else the config value, else `None`.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    config: &ConfigFile,
    key: &str,
) -> Result<Option<T>, Error>
where
    T::Err: Display,
{
    match flag {
        Some(value) => Ok(Some(value)),
        None => config.get(key),
    }
}

/// A boolean switch: the flag can only enable; the config file can set
/// either way.
pub fn resolve_switch(flag: bool, config: &ConfigFile, key: &str) -> Result<bool, Error> {
    if flag {
        return Ok(true);
    }
    Ok(config.get_bool(key)?.unwrap_or(false))
}

/// Model parameters from flags/config; drift, volatility, and reset rate
/// are required, the reset level defaults to 1.
pub fn resolve_params(flags: &ParamFlags, config: &ConfigFile) -> Result<ModelParams, Error> {
    let require = |value: Option<f64>, flag: &str, key: &str| -> Result<f64, Error> {
        resolve(value, config, key)?
            .ok_or_else(|| format!("missing --{flag} (or the `{key}` config key)").into())
    };
    let drift = require(flags.drift, "drift", "drift")?;
    let volatility = require(flags.volatility, "volatility", "volatility")?;
    let reset_rate = require(flags.reset_rate, "reset-rate", "reset-rate")?;
    let reset_level = resolve(flags.reset_level, config, "reset-level")?.unwrap_or(1.0);
    Ok(ModelParams::with_reset_level(
        drift,
        volatility,
        reset_rate,
        reset_level,
    )?)
}

/// The mixing threshold: explicit epsilon wins over a preset, flags win
/// over the config file, and the default is 0.05.
pub fn resolve_epsilon(flags: &EpsilonFlags, config: &ConfigFile) -> Result<f64, Error> {
    if let Some(eps) = flags.epsilon {
        return Ok(eps);
    }
    if let Some(preset) = flags.epsilon_preset {
        return Ok(preset_value(preset));
    }
    if let Some(eps) = config.get("epsilon")? {
        return Ok(eps);
    }
    match config.get_raw("epsilon-preset") {
        Some("one-over-e") => Ok(preset_value(EpsilonPreset::OneOverE)),
        Some(raw) => Err(format!(
            "config key `epsilon-preset`: unknown preset `{raw}` (available: one-over-e)"
        )
        .into()),
        None => Ok(0.05),
    }
}

fn preset_value(preset: EpsilonPreset) -> f64 {
    match preset {
        EpsilonPreset::OneOverE => mobility_core::mixing::MixingConfig::epsilon_one_over_e(),
    }
}

/// A passage query between two percentiles, with the report column name it
/// produces.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentilePair {
    /// Start percentile as a fraction in (0, 1).
    pub start: f64,
    /// Target percentile as a fraction in (0, 1).
    pub target: f64,
    /// Column name, e.g. `mfpt_p50_p75_years`.
    pub column: String,
}

pub const DEFAULT_PERCENTILE_PAIRS: &str = "50:75,50:90";

/// Parses `50:75,50:90`-style pair lists; percentiles are percents in
/// (0, 100), start strictly below target.
pub fn parse_percentile_pairs(text: &str) -> Result<Vec<PercentilePair>, Error> {
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let (start, target) = part
            .split_once(':')
            .ok_or_else(|| format!("percentile pair `{part}`: expected start:target"))?;
        let start: f64 = start
            .trim()
            .parse()
            .map_err(|e| format!("percentile pair `{part}`: {e}"))?;
        let target: f64 = target
            .trim()
            .parse()
            .map_err(|e| format!("percentile pair `{part}`: {e}"))?;
        if !(start > 0.0 && start < 100.0 && target > 0.0 && target < 100.0) {
            return Err(format!(
                "percentile pair `{part}`: percentiles must lie strictly between 0 and 100"
            )
            .into());
        }
        if start >= target {
            return Err(
                format!("percentile pair `{part}`: start must be strictly below target").into(),
            );
        }
        let column = format!(
            "mfpt_p{}_p{}_years",
            percent_label(start),
            percent_label(target)
        );
        pairs.push(PercentilePair {
            start: start / 100.0,
            target: target / 100.0,
            column,
        });
    }
    if pairs.is_empty() {
        return Err("no percentile pairs given".into());
    }
    Ok(pairs)
}

/// Column-name fragment for a percent value: integers stay bare, fractional
/// percentiles swap the decimal point for an underscore (99.9 -> 99_9).
fn percent_label(pct: f64) -> String {
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}").replace('.', "_")
    }
}

/// Parses a `lo:hi:n` volatility grid into its n values, inclusive of both
/// ends.
pub fn parse_sigma_sweep(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("volatility sweep `{text}`: expected lo:hi:n").into());
    };
    let lo: f64 = lo
        .parse()
        .map_err(|e| format!("volatility sweep `{text}`: {e}"))?;
    let hi: f64 = hi
        .parse()
        .map_err(|e| format!("volatility sweep `{text}`: {e}"))?;
    let n: usize = n
        .parse()
        .map_err(|e| format!("volatility sweep `{text}`: {e}"))?;
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(format!("volatility sweep `{text}`: need 0 < lo <= hi").into());
    }
    if n == 0 {
        return Err(format!("volatility sweep `{text}`: need at least one grid value").into());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Parses a comma-separated list of observation times.
pub fn parse_times(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| format!("time list `{text}`: {e}").into())
        })
        .collect()
}

/// Parses a `start:target` level pair.
pub fn parse_levels(text: &str) -> Result<(f64, f64), Error> {
    let (start, target) = text
        .split_once(':')
        .ok_or_else(|| format!("levels `{text}`: expected start:target"))?;
    let start: f64 = start
        .trim()
        .parse()
        .map_err(|e| format!("levels `{text}`: {e}"))?;
    let target: f64 = target
        .trim()
        .parse()
        .map_err(|e| format!("levels `{text}`: {e}"))?;
    Ok((start, target))
}
