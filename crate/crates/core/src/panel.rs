//! The economic time-series panel: loading, validation, forward-fill
//! imputation, train/test splitting, and column standardization.
//!
//! A panel is a date-indexed matrix of day-on-day fractional changes
//! (0.01 = +1%). Missing cells are carried as NaN until imputation; every
//! downstream operation demands a fully imputed panel.

use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Date-indexed T×S matrix of fractional day-on-day changes.
///
/// Invariants: dates strictly increasing with length T, names unique with
/// length S. NaN marks a missing cell; [`impute_forward`] removes them all.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    values: DMatrix<f64>,
}

impl Panel {
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::EmptyPanel);
        }
        if values.nrows() != dates.len() {
            return Err(Error::LengthMismatch {
                what: "panel rows vs dates",
                left: values.nrows(),
                right: dates.len(),
            });
        }
        if values.ncols() != names.len() {
            return Err(Error::LengthMismatch {
                what: "panel columns vs names",
                left: values.ncols(),
                right: names.len(),
            });
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::DuplicateDate { date: pair[1] });
            }
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn { name: name.clone() });
            }
        }
        Ok(Panel {
            dates,
            names,
            values,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Number of rows (time observations).
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    /// Number of columns (series).
    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    fn require_imputed(&self) -> Result<()> {
        let count = self.missing_count();
        if count > 0 {
            return Err(Error::MissingValues { count });
        }
        Ok(())
    }
}

/// How [`impute_forward_with`] treats missing cells that precede a column's
/// first observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadingMissingPolicy {
    /// Reject the panel (the source data should have dropped such series).
    #[default]
    Error,
    /// Fill with 0.0, read as "no change reported yet".
    FillZero,
}

/// Read a panel from CSV. The header must contain `date_column`; every other
/// column is numeric with the empty string marking a missing cell. Rows are
/// sorted by date; missing cells are flagged (NaN), not filled.
pub fn load_panel(path: &Path, date_column: &str) -> Result<Panel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;

    let headers = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| Error::DateColumnNotFound {
            path: path.to_path_buf(),
            column: date_column.to_string(),
        })?;

    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != date_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn { name: name.clone() });
        }
    }

    let n_cols = names.len();
    let mut rows: Vec<(NaiveDate, Vec<f64>)> = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        // 1-based data row number for messages (header is row 0)
        let row = row_no + 1;
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        let date_str = &record[date_idx];
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|_| {
            Error::UnparsableDate {
                row,
                value: date_str.to_string(),
            }
        })?;
        let mut cells = Vec::with_capacity(n_cols);
        for (i, field) in record.iter().enumerate() {
            if i == date_idx {
                continue;
            }
            let col = i - usize::from(i > date_idx);
            if field.is_empty() {
                cells.push(f64::NAN);
            } else {
                let value: f64 = field.parse().map_err(|_| Error::UnparsableNumber {
                    row,
                    column: names[col].clone(),
                    value: field.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(Error::UnparsableNumber {
                        row,
                        column: names[col].clone(),
                        value: field.to_string(),
                    });
                }
                cells.push(value);
            }
        }
        rows.push((date, cells));
    }
    if rows.is_empty() {
        return Err(Error::EmptyPanel);
    }

    rows.sort_by_key(|(date, _)| *date);
    for pair in rows.windows(2) {
        if pair[1].0 == pair[0].0 {
            return Err(Error::DuplicateDate { date: pair[1].0 });
        }
    }

    let dates: Vec<NaiveDate> = rows.iter().map(|(d, _)| *d).collect();
    let values = DMatrix::from_fn(rows.len(), n_cols, |i, j| rows[i].1[j]);
    Panel::new(dates, names, values)
}

/// Write a panel in the same CSV format [`load_panel`] reads (missing cells
/// become empty fields).
pub fn write_panel_csv(panel: &Panel, path: &Path, date_column: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut header = Vec::with_capacity(panel.cols() + 1);
    header.push(date_column.to_string());
    header.extend(panel.names().iter().cloned());
    let io_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(&header).map_err(io_err)?;
    for (i, date) in panel.dates().iter().enumerate() {
        let mut record = Vec::with_capacity(panel.cols() + 1);
        record.push(date.format("%Y-%m-%d").to_string());
        for j in 0..panel.cols() {
            let v = panel.values()[(i, j)];
            record.push(if v.is_nan() {
                String::new()
            } else {
                v.to_string()
            });
        }
        writer.write_record(&record).map_err(io_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Forward-fill every missing cell with the most recent prior observation in
/// its column. Leading missing values are an error under the default policy.
pub fn impute_forward(panel: &Panel) -> Result<Panel> {
    impute_forward_with(panel, LeadingMissingPolicy::Error)
}

pub fn impute_forward_with(panel: &Panel, policy: LeadingMissingPolicy) -> Result<Panel> {
    let mut values = panel.values.clone();
    for j in 0..panel.cols() {
        if (0..panel.rows()).all(|i| values[(i, j)].is_nan()) {
            return Err(Error::EmptyColumn {
                column: panel.names[j].clone(),
            });
        }
        let mut last: Option<f64> = None;
        let mut leading = 0usize;
        for i in 0..panel.rows() {
            let cell = values[(i, j)];
            if cell.is_nan() {
                match (last, policy) {
                    (Some(fill), _) => values[(i, j)] = fill,
                    (None, LeadingMissingPolicy::FillZero) => values[(i, j)] = 0.0,
                    (None, LeadingMissingPolicy::Error) => leading += 1,
                }
            } else {
                last = Some(cell);
            }
        }
        if leading > 0 {
            return Err(Error::LeadingMissing {
                column: panel.names[j].clone(),
                rows: leading,
            });
        }
    }
    Ok(Panel {
        dates: panel.dates.clone(),
        names: panel.names.clone(),
        values,
    })
}

/// A panel split into train rows (date <= split_date) and test rows.
#[derive(Debug, Clone)]
pub struct SplitPanel {
    pub train: Panel,
    pub test: Panel,
    pub split_date: NaiveDate,
}

pub fn split_at(panel: &Panel, split_date: NaiveDate) -> Result<SplitPanel> {
    let n_train = panel.dates.partition_point(|d| *d <= split_date);
    if n_train == 0 {
        return Err(Error::EmptySide {
            side: "train",
            split_date,
        });
    }
    if n_train == panel.rows() {
        return Err(Error::EmptySide {
            side: "test",
            split_date,
        });
    }
    let take = |range: std::ops::Range<usize>| Panel {
        dates: panel.dates[range.clone()].to_vec(),
        names: panel.names.clone(),
        values: panel.values.rows(range.start, range.len()).into_owned(),
    };
    Ok(SplitPanel {
        train: take(0..n_train),
        test: take(n_train..panel.rows()),
        split_date,
    })
}

/// Per-column means and sample (n-1) standard deviations, with the column
/// names they were fit on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    fn check_columns(&self, panel: &Panel) -> Result<()> {
        if panel.names() != self.names.as_slice() {
            return Err(Error::ColumnMismatch {
                detail: format!(
                    "fit on {} column(s) starting with {:?}, got {} column(s) starting with {:?}",
                    self.names.len(),
                    self.names.first(),
                    panel.cols(),
                    panel.names().first()
                ),
            });
        }
        Ok(())
    }

    /// Replace every cell by (value - mean_j) / std_j.
    pub fn apply(&self, panel: &Panel) -> Result<Panel> {
        self.check_columns(panel)?;
        let mut values = panel.values.clone();
        for j in 0..panel.cols() {
            let (m, s) = (self.means[j], self.stds[j]);
            for i in 0..panel.rows() {
                values[(i, j)] = (values[(i, j)] - m) / s;
            }
        }
        Ok(Panel {
            dates: panel.dates.clone(),
            names: panel.names.clone(),
            values,
        })
    }

    /// Undo [`Standardizer::apply`].
    pub fn invert(&self, panel: &Panel) -> Result<Panel> {
        self.check_columns(panel)?;
        let mut values = panel.values.clone();
        for j in 0..panel.cols() {
            let (m, s) = (self.means[j], self.stds[j]);
            for i in 0..panel.rows() {
                values[(i, j)] = values[(i, j)] * s + m;
            }
        }
        Ok(Panel {
            dates: panel.dates.clone(),
            names: panel.names.clone(),
            values,
        })
    }
}

/// Fit per-column means and sample standard deviations. Zero-variance
/// columns are rejected.
pub fn fit_standardizer(panel: &Panel) -> Result<Standardizer> {
    panel.require_imputed()?;
    if panel.rows() < 2 {
        return Err(Error::TooFewRows {
            rows: panel.rows(),
            min: 2,
        });
    }
    let t = panel.rows() as f64;
    let mut means = Vec::with_capacity(panel.cols());
    let mut stds = Vec::with_capacity(panel.cols());
    for j in 0..panel.cols() {
        let col: Vec<f64> = (0..panel.rows()).map(|i| panel.values[(i, j)]).collect();
        // min == max catches constant columns exactly; the mean of a constant
        // column is not always representable, so testing std alone misses them.
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = col.iter().sum::<f64>() / t;
        let ss = col
            .iter()
            .map(|v| {
                let d = v - mean;
                d * d
            })
            .sum::<f64>();
        let std = (ss / (t - 1.0)).sqrt();
        if lo == hi || std <= 0.0 || !std.is_finite() {
            return Err(Error::ZeroVariance {
                column: panel.names[j].clone(),
            });
        }
        means.push(mean);
        stds.push(std);
    }
    Ok(Standardizer {
        names: panel.names.clone(),
        means,
        stds,
    })
}
