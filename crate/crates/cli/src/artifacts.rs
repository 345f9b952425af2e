//! Reading and writing stage artifacts.
//!
//! Every artifact is a plain CSV or JSON file. Floats are written with
//! Rust's shortest-round-trip formatting, so values survive a write/read
//! cycle exactly and identical runs produce identical bytes.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use regimes_core::backtest::{BacktestReport, CorrelationRow};
use regimes_core::classify::{ClassifierKind, CvReport};
use regimes_core::pca::{ExplainedVarianceRow, ScoreMatrix};

use crate::error::{CliError, Result};

/// The headline statistics, in report-column order.
pub const REPORT_COLUMNS: [&str; 8] = [
    "cumulative_return_pct",
    "annualized_return_pct",
    "annualized_vol_pct",
    "skewness",
    "kurtosis",
    "alpha_pct",
    "beta",
    "max_drawdown_pct",
];

fn write_err<E: Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Artifact {
        path: path.to_path_buf(),
        detail: format!("write failed: {e}"),
    }
}

fn read_err<E: Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Artifact {
        path: path.to_path_buf(),
        detail: format!("read failed: {e}"),
    }
}

fn parse_err(path: &Path, detail: String) -> CliError {
    CliError::Artifact {
        path: path.to_path_buf(),
        detail,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(write_err(path))?;
    text.push('\n');
    fs::write(path, text).map_err(write_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(read_err(path))?;
    serde_json::from_str(&text).map_err(read_err(path))
}

fn open_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(write_err(path))
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(read_err(path))
}

/// Render a float losslessly; `None` becomes an empty cell.
fn cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_date(path: &Path, raw: &str) -> Result<NaiveDate> {
    raw.parse()
        .map_err(|e| parse_err(path, format!("bad date {raw:?}: {e}")))
}

fn parse_f64(path: &Path, raw: &str) -> Result<f64> {
    raw.parse()
        .map_err(|e| parse_err(path, format!("bad number {raw:?}: {e}")))
}

fn parse_usize(path: &Path, raw: &str) -> Result<usize> {
    raw.parse()
        .map_err(|e| parse_err(path, format!("bad count {raw:?}: {e}")))
}

pub fn write_scores(path: &Path, scores: &ScoreMatrix) -> Result<()> {
    let mut wtr = open_writer(path)?;
    let mut header = vec!["date".to_string()];
    header.extend((1..=scores.scores.ncols()).map(|j| format!("pc{j}")));
    wtr.write_record(&header).map_err(write_err(path))?;
    for (i, date) in scores.dates.iter().enumerate() {
        let mut row = vec![date.to_string()];
        row.extend((0..scores.scores.ncols()).map(|j| scores.scores[(i, j)].to_string()));
        wtr.write_record(&row).map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

pub fn read_scores(path: &Path) -> Result<ScoreMatrix> {
    let mut rdr = open_reader(path)?;
    let headers = rdr.headers().map_err(read_err(path))?.clone();
    if headers.get(0) != Some("date") || headers.len() < 2 {
        return Err(parse_err(
            path,
            "expected a `date` column followed by score columns".to_string(),
        ));
    }
    let d = headers.len() - 1;
    let mut dates = Vec::new();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(read_err(path))?;
        dates.push(parse_date(path, &record[0])?);
        for j in 0..d {
            rows.push(parse_f64(path, &record[j + 1])?);
        }
    }
    if dates.is_empty() {
        return Err(parse_err(path, "no score rows".to_string()));
    }
    let scores = DMatrix::from_row_slice(dates.len(), d, &rows);
    Ok(ScoreMatrix { dates, scores })
}

pub fn write_labels(path: &Path, dates: &[NaiveDate], labels: &[usize]) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["date", "regime"]).map_err(write_err(path))?;
    for (date, label) in dates.iter().zip(labels) {
        wtr.write_record([date.to_string(), label.to_string()])
            .map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

pub fn read_labels(path: &Path) -> Result<(Vec<NaiveDate>, Vec<usize>)> {
    let mut rdr = open_reader(path)?;
    let mut dates = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(read_err(path))?;
        dates.push(parse_date(path, &record[0])?);
        labels.push(parse_usize(path, &record[1])?);
    }
    if dates.is_empty() {
        return Err(parse_err(path, "no label rows".to_string()));
    }
    Ok((dates, labels))
}

pub fn write_explained_variance(path: &Path, rows: &[ExplainedVarianceRow]) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["dimension", "eigenvalue", "pct_of_variance", "cumulative_pct"])
        .map_err(write_err(path))?;
    for row in rows {
        wtr.write_record([
            row.dimension.to_string(),
            row.eigenvalue.to_string(),
            row.pct_of_variance.to_string(),
            row.cumulative_pct.to_string(),
        ])
        .map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

pub fn write_silhouettes(path: &Path, by_k: &std::collections::BTreeMap<usize, f64>) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["k", "avg_silhouette"]).map_err(write_err(path))?;
    for (k, width) in by_k {
        wtr.write_record([k.to_string(), width.to_string()])
            .map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

/// The aggregate cross-validation table, one row per classifier.
pub fn write_cv_table(path: &Path, reports: &[CvReport]) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["model", "auc", "accuracy", "f1"])
        .map_err(write_err(path))?;
    for report in reports {
        wtr.write_record([
            report.kind.slug().to_string(),
            report.auc.to_string(),
            report.accuracy.to_string(),
            report.f1.to_string(),
        ])
        .map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

/// Per-fold metrics behind the aggregates in [`write_cv_table`].
pub fn write_cv_folds(path: &Path, reports: &[CvReport]) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["model", "fold", "auc", "accuracy", "f1"])
        .map_err(write_err(path))?;
    for report in reports {
        for (fold, metrics) in report.per_fold.iter().enumerate() {
            wtr.write_record([
                report.kind.slug().to_string(),
                (fold + 1).to_string(),
                metrics.auc.to_string(),
                metrics.accuracy.to_string(),
                metrics.f1.to_string(),
            ])
            .map_err(write_err(path))?;
        }
    }
    wtr.flush().map_err(write_err(path))
}

/// Rebuild aggregate reports from the table written by [`write_cv_table`].
/// Per-fold detail is not reloaded; downstream consumers only use the
/// aggregate metrics.
pub fn read_cv_table(path: &Path) -> Result<Vec<CvReport>> {
    let mut rdr = open_reader(path)?;
    let mut reports = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(read_err(path))?;
        let slug = &record[0];
        let kind = ClassifierKind::from_slug(slug)
            .ok_or_else(|| parse_err(path, format!("unknown model {slug:?}")))?;
        reports.push(CvReport {
            kind,
            auc: parse_f64(path, &record[1])?,
            accuracy: parse_f64(path, &record[2])?,
            f1: parse_f64(path, &record[3])?,
            per_fold: Vec::new(),
        });
    }
    if reports.is_empty() {
        return Err(parse_err(path, "no cross-validation rows".to_string()));
    }
    Ok(reports)
}

/// A summary table of backtest reports. `label_headers` name the leading
/// identity columns; each row pairs its identity cells with a report.
pub fn write_report_table(
    path: &Path,
    label_headers: &[&str],
    rows: &[(Vec<String>, &BacktestReport)],
) -> Result<()> {
    let mut wtr = open_writer(path)?;
    let header: Vec<&str> = label_headers
        .iter()
        .chain(REPORT_COLUMNS.iter())
        .copied()
        .collect();
    wtr.write_record(&header).map_err(write_err(path))?;
    for (labels, report) in rows {
        let mut row = labels.clone();
        row.push(cell(Some(report.cumulative_return_pct)));
        row.push(cell(Some(report.annualized_return_pct)));
        row.push(cell(Some(report.annualized_vol_pct)));
        row.push(cell(Some(report.skewness)));
        row.push(cell(Some(report.kurtosis)));
        row.push(cell(report.alpha_pct));
        row.push(cell(report.beta));
        row.push(cell(Some(report.max_drawdown_pct)));
        wtr.write_record(&row).map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

/// Daily returns and the end-of-day wealth index. The index starts at 100
/// before the first row.
pub fn write_wealth(path: &Path, report: &BacktestReport) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["date", "daily_return", "wealth"])
        .map_err(write_err(path))?;
    for (i, date) in report.dates.iter().enumerate() {
        wtr.write_record([
            date.to_string(),
            report.daily_returns[i].to_string(),
            report.wealth[i + 1].to_string(),
        ])
        .map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

pub fn write_correlations(path: &Path, rows: &[CorrelationRow]) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["metric", "stat", "r", "p_value"])
        .map_err(write_err(path))?;
    for row in rows {
        wtr.write_record([
            row.metric.clone(),
            row.stat.clone(),
            cell(row.r),
            cell(row.p_value),
        ])
        .map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}

pub fn write_agreement(path: &Path, rows: &[(ClassifierKind, f64)]) -> Result<()> {
    let mut wtr = open_writer(path)?;
    wtr.write_record(["model", "agreement"]).map_err(write_err(path))?;
    for (kind, agreement) in rows {
        wtr.write_record([kind.slug().to_string(), agreement.to_string()])
            .map_err(write_err(path))?;
    }
    wtr.flush().map_err(write_err(path))
}
