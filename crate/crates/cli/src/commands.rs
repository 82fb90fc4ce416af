//! The single-purpose subcommands: calibrate, mixing, mfpt, adapt-wid.

use crate::args::{AdaptWidArgs, CalibrateArgs, MfptArgs, MixingArgs};
use crate::fmt::sig6;
use crate::settings::{self, ConfigFile};
use crate::{CliResult, Outcome};
use mobility_core::calibration::{calibrate_panel, CalibrationConfig};
use mobility_core::ingest;
use mobility_core::mfpt::{mfpt as passage_time, PassageQuery};
use mobility_core::mixing::{mixing_time, MixingConfig};

pub fn calibrate(args: &CalibrateArgs, config: &ConfigFile) -> CliResult {
    let sigma = settings::resolve(args.sigma, config, "sigma")?.unwrap_or(0.2);
    let hazard = settings::resolve_switch(args.hazard_transform, config, "hazard-transform")?;
    let calib_config = CalibrationConfig {
        sigma_fixed: sigma,
        hazard_transform: hazard,
        ..Default::default()
    };

    let panel = ingest::load_panel(&args.input)?;
    if panel.rows.is_empty() {
        return Err(format!("panel {} contains no data rows", args.input.display()).into());
    }
    let fit = calibrate_panel(&panel.rows, &calib_config);
    for failure in &fit.failures {
        eprintln!("year {}: {}", failure.year, failure.error);
    }
    if fit.calibrated.is_empty() {
        return Err("no year could be calibrated".into());
    }

    std::fs::create_dir_all(&args.output_dir)
        .map_err(|e| format!("cannot create {}: {e}", args.output_dir.display()))?;
    let path = args.output_dir.join("calibration.csv");
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    writer.write_record([
        "year",
        "r",
        "mu",
        "sigma",
        "a",
        "b",
        "share_error",
        "warnings",
    ])?;
    for year in &fit.calibrated {
        let warnings: Vec<String> = year
            .diagnostics
            .warnings
            .iter()
            .map(ToString::to_string)
            .collect();
        writer.write_record([
            year.year.to_string(),
            sig6(year.params.reset_rate),
            sig6(year.params.drift),
            sig6(year.params.volatility),
            sig6(year.coeffs.tail_upper),
            sig6(year.coeffs.tail_lower),
            sig6(year.diagnostics.share_error),
            warnings.join("; "),
        ])?;
    }
    writer.flush()?;

    println!(
        "wrote {} ({} years fitted, {} failed)",
        path.display(),
        fit.calibrated.len(),
        fit.failures.len()
    );
    Ok(if fit.failures.is_empty() {
        Outcome::Complete
    } else {
        Outcome::Partial
    })
}

pub fn mixing(args: &MixingArgs, config: &ConfigFile) -> CliResult {
    let params = settings::resolve_params(&args.params, config)?;
    let epsilon = settings::resolve_epsilon(&args.epsilon, config)?;
    let mixing_config = MixingConfig {
        epsilon,
        ..Default::default()
    };
    let time = mixing_time(&params, &mixing_config)?;
    println!("mixing_time_years = {}", sig6(time));
    Ok(Outcome::Complete)
}

pub fn mfpt(args: &MfptArgs, config: &ConfigFile) -> CliResult {
    let params = settings::resolve_params(&args.params, config)?;
    if let Some(levels) = &args.levels {
        let (start, target) = settings::parse_levels(levels)?;
        let years = passage_time(&params, &PassageQuery::Levels { start, target })?;
        println!("mfpt_levels_years = {}", sig6(years));
        return Ok(Outcome::Complete);
    }
    let pairs_text = settings::resolve(args.percentile_pairs.clone(), config, "percentile-pairs")?
        .unwrap_or_else(|| settings::DEFAULT_PERCENTILE_PAIRS.to_string());
    for pair in settings::parse_percentile_pairs(&pairs_text)? {
        let years = passage_time(
            &params,
            &PassageQuery::Percentiles {
                start: pair.start,
                target: pair.target,
            },
        )?;
        println!("{} = {}", pair.column, sig6(years));
    }
    Ok(Outcome::Complete)
}

pub fn adapt_wid(args: &AdaptWidArgs) -> CliResult {
    let delimiter = match args.delimiter {
        None => b';',
        Some(c) if c.is_ascii() => c as u8,
        Some(c) => return Err(format!("delimiter `{c}` is not an ASCII character").into()),
    };
    let query = ingest::WidQuery {
        country: args.country.clone(),
        variable: args.variable.clone(),
        percentile: args.percentile.clone(),
        delimiter,
        ..Default::default()
    };
    let shares = ingest::adapt_wid_long(&args.wid, &query)?;
    let flows = ingest::load_labor_flows(&args.flows)?;
    let rows = ingest::merge_series(&shares, &flows)?;
    if let Some(parent) = args.output.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
        }
    }
    ingest::write_panel(&args.output, &rows)?;
    println!("wrote {} ({} years)", args.output.display(), rows.len());
    Ok(Outcome::Complete)
}
