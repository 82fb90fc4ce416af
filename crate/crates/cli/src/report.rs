//! The `report` subcommand: calibrate a panel, compute per-year mixing and
//! passage times, and write tables plus charts.
//!
//! Everything is computed before anything is written, so a fatal error
//! leaves no partial files behind. Charts are rendered from the written CSV
//! text, never from a second computation path.

use crate::args::{OutputFormat, ReportArgs};
use crate::charts;
use crate::fmt::sig6;
use crate::settings::{self, ConfigFile, PercentilePair};
use crate::{CliResult, Outcome};
use mobility_core::calibration::{calibrate_panel, CalibratedYear, CalibrationConfig};
use mobility_core::ingest::load_panel;
use mobility_core::mfpt::mfpt_percentiles;
use mobility_core::mixing::{mixing_time, MixingConfig};
use rayon::prelude::*;
use std::path::Path;

struct ReportRow {
    year: i32,
    r: f64,
    mu: f64,
    sigma: f64,
    a: f64,
    b: f64,
    mixing_time_years: f64,
    /// One entry per requested percentile pair, in order.
    passage_years: Vec<f64>,
    share_error: f64,
    warnings: Vec<String>,
}

struct SweepRow {
    sigma: f64,
    year: i32,
    r: f64,
    mu: f64,
    a: f64,
    b: f64,
    mixing_time_years: f64,
}

pub fn run(args: &ReportArgs, config: &ConfigFile) -> CliResult {
    let sigma = settings::resolve(args.sigma, config, "sigma")?.unwrap_or(0.2);
    let epsilon = settings::resolve_epsilon(&args.epsilon, config)?;
    let hazard = settings::resolve_switch(args.hazard_transform, config, "hazard-transform")?;
    let pairs_text = settings::resolve(args.percentile_pairs.clone(), config, "percentile-pairs")?
        .unwrap_or_else(|| settings::DEFAULT_PERCENTILE_PAIRS.to_string());
    let pairs = settings::parse_percentile_pairs(&pairs_text)?;
    let sweep_text = settings::resolve(args.sigma_sweep.clone(), config, "sigma-sweep")?;
    let sweep_sigmas = sweep_text
        .as_deref()
        .map(settings::parse_sigma_sweep)
        .transpose()?;
    let format = match args.format {
        Some(f) => f,
        None => match config.get_raw("format") {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => {
                return Err(
                    format!("config key `format`: expected csv or json, got `{other}`").into(),
                )
            }
        },
    };

    let mixing_config = MixingConfig {
        epsilon,
        ..Default::default()
    };
    let calib_config = CalibrationConfig {
        sigma_fixed: sigma,
        hazard_transform: hazard,
        ..Default::default()
    };

    let panel = load_panel(&args.input)?;
    if panel.rows.is_empty() {
        return Err(format!("panel {} contains no data rows", args.input.display()).into());
    }

    // Fit every year, then derive the mobility series; years may fail
    // individually without sinking the run.
    let fit = calibrate_panel(&panel.rows, &calib_config);
    let mut failures: Vec<(i32, String)> = fit
        .failures
        .iter()
        .map(|f| (f.year, f.error.to_string()))
        .collect();
    let mut rows = Vec::new();
    let computed: Vec<Result<ReportRow, (i32, String)>> = fit
        .calibrated
        .par_iter()
        .map(|year| build_row(year, &mixing_config, &pairs))
        .collect();
    for result in computed {
        match result {
            Ok(row) => rows.push(row),
            Err(failure) => failures.push(failure),
        }
    }
    failures.sort();
    for (year, message) in &failures {
        eprintln!("year {year}: {message}");
    }
    if rows.is_empty() {
        return Err("no year produced a report row".into());
    }
    for row in &rows {
        for warning in &row.warnings {
            eprintln!("year {} warning: {warning}", row.year);
        }
    }

    // The volatility sweep re-runs calibration and mixing on a sigma grid;
    // its failures are diagnostics, not a reason to fail the report.
    let sweep = match &sweep_sigmas {
        None => None,
        Some(sigmas) => {
            let per_sigma: Vec<(Vec<SweepRow>, Vec<String>)> = sigmas
                .par_iter()
                .map(|&s| sweep_one_sigma(&panel.rows, s, &calib_config, &mixing_config))
                .collect();
            let mut sweep_rows = Vec::new();
            for (rows, notes) in per_sigma {
                sweep_rows.extend(rows);
                for note in notes {
                    eprintln!("sweep {note}");
                }
            }
            Some(sweep_rows)
        }
    };

    // All computation done; write the files.
    std::fs::create_dir_all(&args.output_dir)
        .map_err(|e| format!("cannot create {}: {e}", args.output_dir.display()))?;

    let report_csv = render_report_csv(&rows, &pairs)?;
    let csv_path = args.output_dir.join("report.csv");
    std::fs::write(&csv_path, &report_csv)
        .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;
    println!(
        "wrote {} ({} years, {} failed)",
        csv_path.display(),
        rows.len(),
        failures.len()
    );

    if format == OutputFormat::Json {
        let json_path = args.output_dir.join("report.json");
        let json = render_report_json(&rows, &pairs, &failures, sweep.as_deref());
        std::fs::write(&json_path, format!("{json:#}\n"))
            .map_err(|e| format!("cannot write {}: {e}", json_path.display()))?;
        println!("wrote {}", json_path.display());
    }

    if let Some(sweep_rows) = &sweep {
        let sweep_path = args.output_dir.join("sigma_sweep.csv");
        std::fs::write(&sweep_path, render_sweep_csv(sweep_rows)?)
            .map_err(|e| format!("cannot write {}: {e}", sweep_path.display()))?;
        println!("wrote {}", sweep_path.display());
        print_sweep_sensitivity(sweep_rows);
    }

    write_charts(&args.output_dir, &report_csv)?;

    Ok(if failures.is_empty() {
        Outcome::Complete
    } else {
        Outcome::Partial
    })
}

fn build_row(
    year: &CalibratedYear,
    mixing_config: &MixingConfig,
    pairs: &[PercentilePair],
) -> Result<ReportRow, (i32, String)> {
    let mixing = mixing_time(&year.params, mixing_config)
        .map_err(|e| (year.year, format!("mixing time: {e}")))?;
    let mut passage_years = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let years = mfpt_percentiles(&year.params, pair.start, pair.target)
            .map_err(|e| (year.year, format!("{}: {e}", pair.column)))?;
        passage_years.push(years);
    }
    Ok(ReportRow {
        year: year.year,
        r: year.params.reset_rate,
        mu: year.params.drift,
        sigma: year.params.volatility,
        a: year.coeffs.tail_upper,
        b: year.coeffs.tail_lower,
        mixing_time_years: mixing,
        passage_years,
        share_error: year.diagnostics.share_error,
        warnings: year
            .diagnostics
            .warnings
            .iter()
            .map(ToString::to_string)
            .collect(),
    })
}

fn sweep_one_sigma(
    panel: &[mobility_core::calibration::YearObservation],
    sigma: f64,
    calib_config: &CalibrationConfig,
    mixing_config: &MixingConfig,
) -> (Vec<SweepRow>, Vec<String>) {
    let config = CalibrationConfig {
        sigma_fixed: sigma,
        ..calib_config.clone()
    };
    let fit = calibrate_panel(panel, &config);
    let mut notes: Vec<String> = fit
        .failures
        .iter()
        .map(|f| format!("sigma {}: year {}: {}", sig6(sigma), f.year, f.error))
        .collect();
    let mut rows = Vec::new();
    for year in &fit.calibrated {
        match mixing_time(&year.params, mixing_config) {
            Ok(mixing) => rows.push(SweepRow {
                sigma,
                year: year.year,
                r: year.params.reset_rate,
                mu: year.params.drift,
                a: year.coeffs.tail_upper,
                b: year.coeffs.tail_lower,
                mixing_time_years: mixing,
            }),
            Err(e) => notes.push(format!(
                "sigma {}: year {}: mixing time: {e}",
                sig6(sigma),
                year.year
            )),
        }
    }
    (rows, notes)
}

fn render_report_csv(rows: &[ReportRow], pairs: &[PercentilePair]) -> Result<String, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "year".to_string(),
        "r".to_string(),
        "mu".to_string(),
        "sigma".to_string(),
        "a".to_string(),
        "b".to_string(),
        "mixing_time_years".to_string(),
    ];
    header.extend(pairs.iter().map(|p| p.column.clone()));
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![
            row.year.to_string(),
            sig6(row.r),
            sig6(row.mu),
            sig6(row.sigma),
            sig6(row.a),
            sig6(row.b),
            sig6(row.mixing_time_years),
        ];
        record.extend(row.passage_years.iter().map(|&t| sig6(t)));
        writer.write_record(&record)?;
    }
    let bytes = writer
        .into_inner()
        .expect("flushing an in-memory writer cannot fail");
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn render_sweep_csv(rows: &[SweepRow]) -> Result<String, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["sigma", "year", "r", "mu", "a", "b", "mixing_time_years"])?;
    for row in rows {
        writer.write_record([
            sig6(row.sigma),
            row.year.to_string(),
            sig6(row.r),
            sig6(row.mu),
            sig6(row.a),
            sig6(row.b),
            sig6(row.mixing_time_years),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .expect("flushing an in-memory writer cannot fail");
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Six-significant-digit JSON number (falls back to a string for
/// non-finite values, which the row invariants rule out anyway).
fn json_number(x: f64) -> serde_json::Value {
    let rounded: f64 = sig6(x).parse().unwrap_or(x);
    serde_json::Number::from_f64(rounded)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|| serde_json::Value::String(sig6(x)))
}

fn render_report_json(
    rows: &[ReportRow],
    pairs: &[PercentilePair],
    failures: &[(i32, String)],
    sweep: Option<&[SweepRow]>,
) -> serde_json::Value {
    let rows_json: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            let mut object = serde_json::Map::new();
            object.insert("year".into(), row.year.into());
            object.insert("r".into(), json_number(row.r));
            object.insert("mu".into(), json_number(row.mu));
            object.insert("sigma".into(), json_number(row.sigma));
            object.insert("a".into(), json_number(row.a));
            object.insert("b".into(), json_number(row.b));
            object.insert(
                "mixing_time_years".into(),
                json_number(row.mixing_time_years),
            );
            for (pair, &years) in pairs.iter().zip(&row.passage_years) {
                object.insert(pair.column.clone(), json_number(years));
            }
            object.insert("share_error".into(), json_number(row.share_error));
            object.insert(
                "warnings".into(),
                serde_json::Value::Array(
                    row.warnings
                        .iter()
                        .map(|w| serde_json::Value::String(w.clone()))
                        .collect(),
                ),
            );
            serde_json::Value::Object(object)
        })
        .collect();

    let failures_json: Vec<serde_json::Value> = failures
        .iter()
        .map(|(year, message)| serde_json::json!({ "year": year, "error": message }))
        .collect();

    let mut root = serde_json::Map::new();
    root.insert("rows".into(), serde_json::Value::Array(rows_json));
    root.insert("failures".into(), serde_json::Value::Array(failures_json));
    if let Some(sweep_rows) = sweep {
        let sweep_json: Vec<serde_json::Value> = sweep_rows
            .iter()
            .map(|row| {
                serde_json::json!({
                    "sigma": json_number(row.sigma),
                    "year": row.year,
                    "r": json_number(row.r),
                    "mu": json_number(row.mu),
                    "a": json_number(row.a),
                    "b": json_number(row.b),
                    "mixing_time_years": json_number(row.mixing_time_years),
                })
            })
            .collect();
        root.insert("sigma_sweep".into(), serde_json::Value::Array(sweep_json));
    }
    serde_json::Value::Object(root)
}

/// Documents how the peak mixing-time year and value move with the assumed
/// volatility — the sensitivity readout for the fixed-sigma identification.
fn print_sweep_sensitivity(rows: &[SweepRow]) {
    let mut sigmas: Vec<f64> = rows.iter().map(|r| r.sigma).collect();
    sigmas.dedup();
    println!("volatility sensitivity of the peak mixing time:");
    for sigma in sigmas {
        let peak = rows
            .iter()
            .filter(|r| r.sigma == sigma)
            .max_by(|x, y| x.mixing_time_years.total_cmp(&y.mixing_time_years));
        if let Some(peak) = peak {
            println!(
                "  sigma {}: max mixing_time_years {} in {}",
                sig6(sigma),
                sig6(peak.mixing_time_years),
                peak.year
            );
        }
    }
}

/// Renders both charts from the CSV text that was just written.
fn write_charts(dir: &Path, report_csv: &str) -> Result<(), Box<dyn std::error::Error>> {
    let mut reader = csv::Reader::from_reader(report_csv.as_bytes());
    let header = reader.headers()?.clone();
    let mixing_idx = header
        .iter()
        .position(|h| h == "mixing_time_years")
        .ok_or("report.csv is missing the mixing_time_years column")?;
    let pair_columns: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("mfpt_"))
        .map(|(i, h)| (i, charts::passage_series_label(h)))
        .collect();

    let mut mixing_points = Vec::new();
    let mut passage_points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); pair_columns.len()];
    for record in reader.records() {
        let record = record?;
        let year: f64 = record[0].parse()?;
        mixing_points.push((year, record[mixing_idx].parse()?));
        for (series, (column, _)) in passage_points.iter_mut().zip(&pair_columns) {
            series.push((year, record[*column].parse()?));
        }
    }

    let mixing_chart = charts::line_chart(
        "Mixing time by year",
        "years",
        &[charts::Series {
            label: "mixing time".to_string(),
            points: mixing_points,
        }],
    );
    std::fs::write(dir.join("mixing_time.svg"), mixing_chart)?;

    let passage_series: Vec<charts::Series> = pair_columns
        .iter()
        .zip(passage_points)
        .map(|((_, label), points)| charts::Series {
            label: label.clone(),
            points,
        })
        .collect();
    let passage_chart =
        charts::line_chart("Mean first-passage time by year", "years", &passage_series);
    std::fs::write(dir.join("mfpt.svg"), passage_chart)?;
    Ok(())
}
