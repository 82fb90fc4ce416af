//! `mobility` — command-line pipeline for income-mobility analysis.
//!
//! Subcommands cover the full workflow: adapt raw source files into the
//! normalized panel schema, calibrate model parameters year by year, compute
//! mixing times and mean first-passage times (analytically or by
//! simulation), and produce a per-year report with CSV/JSON tables and SVG
//! charts.
//!
//! Exit codes: 0 on success, 1 on any fatal error, 2 on partial success
//! (some years failed; failures are listed on stderr).

mod args;
mod charts;
mod commands;
mod fmt;
mod report;
mod settings;
mod simulate;

use clap::Parser;
use std::process::ExitCode;

/// How a command ended when it did not fail outright.
pub(crate) enum Outcome {
    Complete,
    /// Output was produced but some units of work failed (listed on stderr).
    Partial,
}

pub(crate) type CliResult = Result<Outcome, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    // clap's own exit convention uses 2 for usage errors; 2 is reserved here
    // for partial success, so argument errors are remapped to 1.
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let config = match &cli.config {
        Some(path) => settings::ConfigFile::load(path),
        None => Ok(settings::ConfigFile::empty()),
    };
    let config = match config {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    };

    let result = match &cli.command {
        args::Command::Calibrate(args) => commands::calibrate(args, &config),
        args::Command::Mixing(args) => commands::mixing(args, &config),
        args::Command::Mfpt(args) => commands::mfpt(args, &config),
        args::Command::Simulate(cmd) => simulate::run(cmd, &config),
        args::Command::Report(args) => report::run(args, &config),
        args::Command::AdaptWid(args) => commands::adapt_wid(args),
    };

    match result {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
