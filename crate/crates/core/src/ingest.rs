//! Panel loading and adaptation of raw distributional-series exports.
//!
//! The native panel format is a comma-separated file with the exact header
//! `year,top1_share,separations,employment`, one row per year, years
//! strictly increasing, and the share expressed as a fraction in (0, 1).
//! Values that look like percentages are rejected with a pointed message
//! rather than silently divided.
//!
//! [`adapt_wid_long`] converts the long ("tidy") layout used by public
//! inequality databases — one observation per row, keyed by country,
//! variable and percentile codes — into a per-year share series, and
//! [`merge_series`] joins that with a separations/employment series into
//! panel rows.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use crate::calibration::YearObservation;
use crate::error::{Error, Result};

/// The native panel header.
pub const PANEL_HEADER: [&str; 4] = ["year", "top1_share", "separations", "employment"];

/// A loaded panel and the path it was read from.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelFile {
    pub rows: Vec<YearObservation>,
    pub source: PathBuf,
}

fn open_reader(path: &Path, delimiter: u8) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_field<T: std::str::FromStr>(raw: &str, name: &str, path: &Path, line: u64) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        path: path.to_owned(),
        line,
        message: format!("cannot parse {name} from '{raw}'"),
    })
}

/// Loads a native panel file. Row numbers in errors are 1-based file lines
/// counting the header.
pub fn load_panel(path: impl AsRef<Path>) -> Result<PanelFile> {
    let path = path.as_ref();
    let mut reader = open_reader(path, b',')?;
    check_header(&mut reader, path, &PANEL_HEADER)?;

    let mut rows: Vec<YearObservation> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_owned(),
            line,
            message: e.to_string(),
        })?;
        if record.len() != PANEL_HEADER.len() {
            return Err(Error::Parse {
                path: path.to_owned(),
                line,
                message: format!(
                    "expected {} fields, found {}",
                    PANEL_HEADER.len(),
                    record.len()
                ),
            });
        }
        let obs = YearObservation {
            year: parse_field(&record[0], "year", path, line)?,
            top1_share: parse_field(&record[1], "top1_share", path, line)?,
            separations: parse_field(&record[2], "separations", path, line)?,
            employment: parse_field(&record[3], "employment", path, line)?,
        };
        obs.validate().map_err(|e| Error::Validation {
            path: path.to_owned(),
            row: line,
            constraint: e.to_string(),
        })?;
        if let Some(prev) = rows.last() {
            if obs.year <= prev.year {
                return Err(Error::Validation {
                    path: path.to_owned(),
                    row: line,
                    constraint: format!(
                        "years must be strictly increasing, got {} after {}",
                        obs.year, prev.year
                    ),
                });
            }
        }
        rows.push(obs);
    }
    Ok(PanelFile {
        rows,
        source: path.to_owned(),
    })
}

fn check_header(reader: &mut csv::Reader<File>, path: &Path, expected: &[&str]) -> Result<()> {
    let headers = reader.headers().map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: 1,
        message: e.to_string(),
    })?;
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(Error::Parse {
            path: path.to_owned(),
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                expected.join(","),
                found.join(",")
            ),
        });
    }
    Ok(())
}

/// Writes a panel in canonical form: integer years, floats in the shortest
/// representation that round-trips. Loading and re-writing a canonical file
/// reproduces it byte for byte.
pub fn write_panel(path: impl AsRef<Path>, rows: &[YearObservation]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => Error::Parse {
            path: path.to_owned(),
            line: 0,
            message: format!("write failed: {other:?}"),
        },
    };
    writer.write_record(PANEL_HEADER).map_err(csv_err)?;
    for obs in rows {
        writer
            .write_record([
                obs.year.to_string(),
                obs.top1_share.to_string(),
                obs.separations.to_string(),
                obs.employment.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)
}

/// Selector for one series in a long-format distributional export.
///
/// Files of this kind carry one observation per row, keyed by country,
/// variable and percentile codes, usually semicolon-separated. Column names
/// are configurable because exports differ in capitalization and extras.
#[derive(Debug, Clone, PartialEq)]
pub struct WidQuery {
    pub country: String,
    pub variable: String,
    pub percentile: String,
    pub delimiter: u8,
    pub country_column: String,
    pub variable_column: String,
    pub percentile_column: String,
    pub year_column: String,
    pub value_column: String,
}

impl Default for WidQuery {
    fn default() -> Self {
        Self {
            country: "MK".into(),
            variable: "sptinc992j".into(),
            percentile: "p99p100".into(),
            delimiter: b';',
            country_column: "country".into(),
            variable_column: "variable".into(),
            percentile_column: "percentile".into(),
            year_column: "year".into(),
            value_column: "value".into(),
        }
    }
}

/// Extracts a per-year share series from a long-format export and
/// normalizes it to fractions.
///
/// Rows with an empty value cell are skipped (exports often carry them).
/// Exact duplicate observations are deduplicated; duplicates with
/// conflicting values are an error. The whole series must be either
/// fractions in (0, 1) or percentages in (1, 100]; a mix — or the ambiguous
/// value 1.0 — is rejected rather than guessed at.
pub fn adapt_wid_long(path: impl AsRef<Path>, query: &WidQuery) -> Result<Vec<(i32, f64)>> {
    let path = path.as_ref();
    let mut reader = open_reader(path, query.delimiter)?;
    let headers = reader.headers().map_err(|e| Error::Parse {
        path: path.to_owned(),
        line: 1,
        message: e.to_string(),
    })?;
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                path: path.to_owned(),
                line: 1,
                message: format!(
                    "column '{name}' not found; file has columns '{}'",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            })
    };
    let col_country = column(&query.country_column)?;
    let col_variable = column(&query.variable_column)?;
    let col_percentile = column(&query.percentile_column)?;
    let col_year = column(&query.year_column)?;
    let col_value = column(&query.value_column)?;

    // (year, value, source line), later deduplicated by year.
    let mut series: Vec<(i32, f64, u64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_owned(),
            line,
            message: e.to_string(),
        })?;
        let field = |col: usize| record.get(col).unwrap_or("");
        if field(col_country) != query.country
            || field(col_variable) != query.variable
            || field(col_percentile) != query.percentile
        {
            continue;
        }
        let raw_value = field(col_value);
        if raw_value.is_empty() {
            continue;
        }
        let year: i32 = parse_field(field(col_year), "year", path, line)?;
        let value: f64 = parse_field(raw_value, "value", path, line)?;
        if !(value.is_finite() && value > 0.0 && value <= 100.0) {
            return Err(Error::Validation {
                path: path.to_owned(),
                row: line,
                constraint: format!("share value {value} for year {year} is outside (0, 100]"),
            });
        }
        series.push((year, value, line));
    }
    if series.is_empty() {
        return Err(Error::MissingSeries {
            path: path.to_owned(),
            detail: format!(
                "no rows match {}='{}', {}='{}', {}='{}'",
                query.country_column,
                query.country,
                query.variable_column,
                query.variable,
                query.percentile_column,
                query.percentile
            ),
        });
    }

    series.sort_by_key(|&(year, _, line)| (year, line));
    let mut deduped: Vec<(i32, f64, u64)> = Vec::new();
    for (year, value, line) in series {
        match deduped.last() {
            Some(&(prev_year, prev_value, _)) if prev_year == year => {
                if prev_value != value {
                    return Err(Error::Validation {
                        path: path.to_owned(),
                        row: line,
                        constraint: format!(
                            "conflicting duplicate for year {year}: {prev_value} vs {value}"
                        ),
                    });
                }
            }
            _ => deduped.push((year, value, line)),
        }
    }

    let all_fractions = deduped.iter().all(|&(_, v, _)| v < 1.0);
    let all_percent = deduped.iter().all(|&(_, v, _)| v > 1.0);
    if all_fractions {
        Ok(deduped.into_iter().map(|(y, v, _)| (y, v)).collect())
    } else if all_percent {
        Ok(deduped
            .into_iter()
            .map(|(y, v, _)| (y, v / 100.0))
            .collect())
    } else {
        let (year, value, line) = *deduped
            .iter()
            .find(|&&(_, v, _)| v >= 1.0)
            .expect("a non-fraction value exists in this branch");
        Err(Error::Validation {
            path: path.to_owned(),
            row: line,
            constraint: if deduped.iter().all(|&(_, v, _)| v >= 1.0) {
                format!("value 1.0 for year {year} is ambiguous: fraction or percentage?")
            } else {
                format!(
                    "series mixes fractions and percentages (year {year} has {value} while \
                     other years are below 1); normalize the file first"
                )
            },
        })
    }
}

/// Loads a separations/employment series with the exact header
/// `year,separations,employment`, years strictly increasing.
pub fn load_labor_flows(path: impl AsRef<Path>) -> Result<Vec<(i32, f64, f64)>> {
    let path = path.as_ref();
    let mut reader = open_reader(path, b',')?;
    check_header(&mut reader, path, &["year", "separations", "employment"])?;
    let mut rows: Vec<(i32, f64, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx as u64 + 2;
        let record = record.map_err(|e| Error::Parse {
            path: path.to_owned(),
            line,
            message: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(Error::Parse {
                path: path.to_owned(),
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let year: i32 = parse_field(&record[0], "year", path, line)?;
        let separations: f64 = parse_field(&record[1], "separations", path, line)?;
        let employment: f64 = parse_field(&record[2], "employment", path, line)?;
        if !(separations.is_finite() && separations >= 0.0) {
            return Err(Error::Validation {
                path: path.to_owned(),
                row: line,
                constraint: format!("separations must be non-negative, got {separations}"),
            });
        }
        if !(employment.is_finite() && employment > 0.0) {
            return Err(Error::Validation {
                path: path.to_owned(),
                row: line,
                constraint: format!("employment must be positive, got {employment}"),
            });
        }
        if let Some(&(prev, _, _)) = rows.last() {
            if year <= prev {
                return Err(Error::Validation {
                    path: path.to_owned(),
                    row: line,
                    constraint: format!(
                        "years must be strictly increasing, got {year} after {prev}"
                    ),
                });
            }
        }
        rows.push((year, separations, employment));
    }
    Ok(rows)
}

/// Inner-joins a share series with a labor-flow series on year, producing
/// panel rows for the years present in both. Each input must have unique
/// years.
pub fn merge_series(
    shares: &[(i32, f64)],
    flows: &[(i32, f64, f64)],
) -> Result<Vec<YearObservation>> {
    let mut flow_by_year: HashMap<i32, (f64, f64)> = HashMap::new();
    for &(year, separations, employment) in flows {
        if flow_by_year
            .insert(year, (separations, employment))
            .is_some()
        {
            return Err(Error::Domain(format!(
                "duplicate year {year} in labor-flow series"
            )));
        }
    }
    let mut seen_share_years = std::collections::HashSet::new();
    let mut rows: Vec<YearObservation> = Vec::new();
    for &(year, share) in shares {
        if !seen_share_years.insert(year) {
            return Err(Error::Domain(format!(
                "duplicate year {year} in share series"
            )));
        }
        if let Some(&(separations, employment)) = flow_by_year.get(&year) {
            rows.push(YearObservation {
                year,
                top1_share: share,
                separations,
                employment,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Domain(
            "no overlapping years between the share series and the labor-flow series".into(),
        ));
    }
    rows.sort_by_key(|obs| obs.year);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn load_panel_happy_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "panel.csv",
            "year,top1_share,separations,employment\n\
             1995,0.08,120,600\n\
             1996,0.085,130,610\n",
        );
        let panel = load_panel(&path).unwrap();
        assert_eq!(panel.rows.len(), 2);
        assert_eq!(panel.rows[0].year, 1995);
        assert!((panel.rows[0].top1_share - 0.08).abs() < 1e-15);
        assert!((panel.rows[1].separations - 130.0).abs() < 1e-15);
        assert_eq!(panel.source, path);
    }

    #[test]
    fn load_panel_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(&dir, "p.csv", "year,share,sep,emp\n1995,0.08,120,600\n");
        match load_panel(&path) {
            Err(Error::Parse {
                line: 1, message, ..
            }) => {
                assert!(message.contains("top1_share"), "message: {message}");
            }
            other => panic!("expected header parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_panel_points_at_bad_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "p.csv",
            "year,top1_share,separations,employment\n\
             1995,0.08,120,600\n\
             1996,not_a_number,130,610\n",
        );
        match load_panel(&path) {
            Err(Error::Parse {
                line: 3, message, ..
            }) => {
                assert!(message.contains("top1_share"), "message: {message}");
            }
            other => panic!("expected parse error at line 3, got {other:?}"),
        }
    }

    #[test]
    fn load_panel_percent_guard_is_loud() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "p.csv",
            "year,top1_share,separations,employment\n1995,8.2,120,600\n",
        );
        match load_panel(&path) {
            Err(Error::Validation {
                row: 2, constraint, ..
            }) => {
                assert!(
                    constraint.contains("percentage"),
                    "constraint: {constraint}"
                );
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn load_panel_rejects_unsorted_years() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "p.csv",
            "year,top1_share,separations,employment\n\
             1996,0.08,120,600\n\
             1995,0.08,120,600\n",
        );
        match load_panel(&path) {
            Err(Error::Validation {
                row: 3, constraint, ..
            }) => {
                assert!(
                    constraint.contains("strictly increasing"),
                    "constraint: {constraint}"
                );
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn write_then_load_round_trips_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            YearObservation {
                year: 1995,
                top1_share: 0.08,
                separations: 120.0,
                employment: 600.0,
            },
            YearObservation {
                year: 1996,
                top1_share: 0.0851,
                separations: 130.5,
                employment: 610.25,
            },
        ];
        let p1 = dir.path().join("a.csv");
        write_panel(&p1, &rows).unwrap();
        let loaded = load_panel(&p1).unwrap();
        assert_eq!(loaded.rows, rows);
        let p2 = dir.path().join("b.csv");
        write_panel(&p2, &loaded.rows).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    const WID_SAMPLE: &str = "\
country;variable;percentile;year;value
MK;sptinc992j;p99p100;1995;0.082
MK;sptinc992j;p99p100;1996;0.0855
MK;sptinc992j;p90p100;1995;0.31
FR;sptinc992j;p99p100;1995;0.10
MK;xghost;p99p100;1995;0.5
";

    #[test]
    fn adapt_wid_filters_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(&dir, "wid.csv", WID_SAMPLE);
        let series = adapt_wid_long(&path, &WidQuery::default()).unwrap();
        assert_eq!(series, vec![(1995, 0.082), (1996, 0.0855)]);
    }

    #[test]
    fn adapt_wid_normalizes_percent_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "wid.csv",
            "country;variable;percentile;year;value\n\
             MK;sptinc992j;p99p100;1996;8.55\n\
             MK;sptinc992j;p99p100;1995;8.2\n",
        );
        let series = adapt_wid_long(&path, &WidQuery::default()).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!((series[0].0, series[1].0), (1995, 1996));
        assert!((series[0].1 - 0.082).abs() < 1e-15);
        assert!((series[1].1 - 0.0855).abs() < 1e-15);
    }

    #[test]
    fn adapt_wid_rejects_mixed_units() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "wid.csv",
            "country;variable;percentile;year;value\n\
             MK;sptinc992j;p99p100;1995;0.082\n\
             MK;sptinc992j;p99p100;1996;8.55\n",
        );
        match adapt_wid_long(&path, &WidQuery::default()) {
            Err(Error::Validation {
                row: 3, constraint, ..
            }) => {
                assert!(constraint.contains("mixes"), "constraint: {constraint}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn adapt_wid_skips_empty_values_and_dedupes() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "wid.csv",
            "country;variable;percentile;year;value\n\
             MK;sptinc992j;p99p100;1995;0.082\n\
             MK;sptinc992j;p99p100;1995;0.082\n\
             MK;sptinc992j;p99p100;1996;\n",
        );
        let series = adapt_wid_long(&path, &WidQuery::default()).unwrap();
        assert_eq!(series, vec![(1995, 0.082)]);
    }

    #[test]
    fn adapt_wid_rejects_conflicting_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "wid.csv",
            "country;variable;percentile;year;value\n\
             MK;sptinc992j;p99p100;1995;0.082\n\
             MK;sptinc992j;p99p100;1995;0.083\n",
        );
        assert!(matches!(
            adapt_wid_long(&path, &WidQuery::default()),
            Err(Error::Validation { row: 3, .. })
        ));
    }

    #[test]
    fn adapt_wid_missing_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(&dir, "wid.csv", WID_SAMPLE);
        let query = WidQuery {
            country: "DE".into(),
            ..WidQuery::default()
        };
        match adapt_wid_long(&path, &query) {
            Err(Error::MissingSeries { detail, .. }) => {
                assert!(detail.contains("DE"), "detail: {detail}");
            }
            other => panic!("expected missing series, got {other:?}"),
        }
    }

    #[test]
    fn adapt_wid_reports_missing_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(&dir, "wid.csv", "land;variable;percentile;year;value\n");
        match adapt_wid_long(&path, &WidQuery::default()) {
            Err(Error::Parse {
                line: 1, message, ..
            }) => {
                assert!(message.contains("'country'"), "message: {message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn adapt_wid_custom_columns_and_delimiter() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "wid.csv",
            "iso,series,group,yr,share\nMK,top,p99,1995,0.08\n",
        );
        let query = WidQuery {
            variable: "top".into(),
            percentile: "p99".into(),
            delimiter: b',',
            country_column: "iso".into(),
            variable_column: "series".into(),
            percentile_column: "group".into(),
            year_column: "yr".into(),
            value_column: "share".into(),
            ..WidQuery::default()
        };
        assert_eq!(adapt_wid_long(&path, &query).unwrap(), vec![(1995, 0.08)]);
    }

    #[test]
    fn labor_flows_load_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_tmp(
            &dir,
            "flows.csv",
            "year,separations,employment\n1995,120,600\n1996,130,610\n",
        );
        let flows = load_labor_flows(&path).unwrap();
        assert_eq!(flows, vec![(1995, 120.0, 600.0), (1996, 130.0, 610.0)]);

        let bad = write_tmp(&dir, "bad.csv", "year,separations,employment\n1995,120,0\n");
        assert!(matches!(
            load_labor_flows(&bad),
            Err(Error::Validation { row: 2, .. })
        ));
    }

    #[test]
    fn merge_joins_on_year() {
        let shares = [(1995, 0.08), (1996, 0.085), (1997, 0.09)];
        let flows = [
            (1996, 130.0, 610.0),
            (1997, 140.0, 620.0),
            (1998, 150.0, 630.0),
        ];
        let rows = merge_series(&shares, &flows).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].year, 1996);
        assert!((rows[0].top1_share - 0.085).abs() < 1e-15);
        assert!((rows[1].employment - 620.0).abs() < 1e-15);
    }

    #[test]
    fn merge_rejects_disjoint_series() {
        let shares = [(1995, 0.08)];
        let flows = [(1996, 130.0, 610.0)];
        assert!(matches!(
            merge_series(&shares, &flows),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_panel("/nonexistent/panel.csv"),
            Err(Error::Io { .. })
        ));
    }
}
