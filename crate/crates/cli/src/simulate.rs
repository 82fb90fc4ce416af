//! The `simulate` subcommands: Monte Carlo runs that cross-check the
//! analytic pipeline, written as small CSV files.

use crate::args::{SimFlags, SimMfptArgs, SimStationaryArgs, SimTvArgs, SimulateCmd};
use crate::fmt::sig6;
use crate::settings::{self, ConfigFile};
use crate::{CliResult, Outcome};
use mobility_core::montecarlo::{
    empirical_mfpt, empirical_top_share, empirical_tv, sample_stationary, SimConfig,
};
use std::path::{Path, PathBuf};

pub fn run(cmd: &SimulateCmd, config: &ConfigFile) -> CliResult {
    match cmd {
        SimulateCmd::Stationary(args) => stationary(args, config),
        SimulateCmd::Mfpt(args) => mfpt(args, config),
        SimulateCmd::Tv(args) => tv(args, config),
    }
}

fn resolve_sim(
    flags: &SimFlags,
    config: &ConfigFile,
) -> Result<(u64, usize), Box<dyn std::error::Error>> {
    let seed = settings::resolve(flags.seed, config, "seed")?.unwrap_or(0);
    let n_paths = settings::resolve(flags.n_paths, config, "n-paths")?
        .unwrap_or_else(|| SimConfig::default().n_paths);
    Ok((seed, n_paths))
}

fn output_file(dir: &Path, name: &str) -> Result<PathBuf, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    Ok(dir.join(name))
}

fn stationary(args: &SimStationaryArgs, config: &ConfigFile) -> CliResult {
    let params = settings::resolve_params(&args.params, config)?;
    let (seed, n_paths) = resolve_sim(&args.sim, config)?;
    let burn_in = settings::resolve(args.burn_in, config, "burn-in")?.unwrap_or(100.0);

    let sample = sample_stationary(&params, n_paths, seed, burn_in)?;
    let top1 = empirical_top_share(&sample, 0.01)?;

    let path = output_file(&args.output_dir, "stationary_sample.csv")?;
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    writer.write_record(["income"])?;
    for x in &sample {
        writer.write_record([sig6(*x)])?;
    }
    writer.flush()?;

    println!("wrote {} ({} draws)", path.display(), sample.len());
    println!("empirical_top1_share = {}", sig6(top1));
    Ok(Outcome::Complete)
}

fn mfpt(args: &SimMfptArgs, config: &ConfigFile) -> CliResult {
    let params = settings::resolve_params(&args.params, config)?;
    let (seed, n_paths) = resolve_sim(&args.sim, config)?;
    let sim_config = SimConfig {
        n_paths,
        dt: settings::resolve(args.dt, config, "dt")?.unwrap_or_else(|| SimConfig::default().dt),
        seed,
        bridge_correction: !args.no_bridge,
        fpt_horizon_cap: settings::resolve(args.horizon_cap, config, "horizon-cap")?,
    };

    let result = empirical_mfpt(&params, args.from_level, args.to_level, &sim_config)?;
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }

    let path = output_file(&args.output_dir, "mfpt_sim.csv")?;
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    writer.write_record([
        "estimate",
        "standard_error",
        "n_effective",
        "truncated_fraction",
    ])?;
    writer.write_record([
        sig6(result.estimate),
        sig6(result.standard_error),
        result.n_effective.to_string(),
        sig6(result.truncated_fraction),
    ])?;
    writer.flush()?;

    println!("wrote {}", path.display());
    println!(
        "mfpt_years = {} (se {})",
        sig6(result.estimate),
        sig6(result.standard_error)
    );
    Ok(Outcome::Complete)
}

fn tv(args: &SimTvArgs, config: &ConfigFile) -> CliResult {
    let params = settings::resolve_params(&args.params, config)?;
    let (seed, n_paths) = resolve_sim(&args.sim, config)?;
    let times_text = settings::resolve(args.times.clone(), config, "times")?
        .ok_or("missing --times (or the `times` config key)")?;
    let times = settings::parse_times(&times_text)?;
    let sim_config = SimConfig {
        n_paths,
        seed,
        ..Default::default()
    };

    let curve = empirical_tv(&params, &times, &sim_config)?;

    let path = output_file(&args.output_dir, "tv_sim.csv")?;
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    writer.write_record(["time_years", "tv", "noise_floor"])?;
    for ((t, tv), floor) in curve.times.iter().zip(&curve.tv).zip(&curve.noise_floor) {
        writer.write_record([sig6(*t), sig6(*tv), sig6(*floor)])?;
    }
    writer.flush()?;

    println!(
        "wrote {} ({} bins of width {})",
        path.display(),
        curve.n_bins,
        sig6(curve.bin_width)
    );
    Ok(Outcome::Complete)
}
