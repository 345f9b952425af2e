//! Daily strategy simulation conditioned on a regime signal.
//!
//! Positions are decided per day from the signal and settled at the day's
//! return; weights reset to target every day and transaction costs are zero.
//! The signal is assumed to be causal: the regime used for day t was
//! produced from information through day t-1 (the pipeline shifts it).

mod stats;
pub mod pipeline;

pub use stats::{
    pearson, performance_stats, student_t_two_sided_p, BacktestReport, StatsOptions,
    TRADING_DAYS_PER_YEAR, WEALTH_BASE,
};

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::classify::CvReport;
use crate::error::{Error, Result};
use crate::panel::{load_panel, Panel};

/// The four tradable assets, in their fixed column order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Asset {
    Sp500,
    Crude,
    Gold,
    Bonds,
}

impl Asset {
    pub const ALL: [Asset; 4] = [Asset::Sp500, Asset::Crude, Asset::Gold, Asset::Bonds];

    /// CSV column name and file-name slug.
    pub fn slug(self) -> &'static str {
        match self {
            Asset::Sp500 => "sp500",
            Asset::Crude => "crude",
            Asset::Gold => "gold",
            Asset::Bonds => "bonds",
        }
    }

    pub fn from_slug(slug: &str) -> Option<Asset> {
        Asset::ALL.iter().copied().find(|a| a.slug() == slug)
    }
}

impl std::fmt::Display for Asset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Asset::Sp500 => "S&P 500",
            Asset::Crude => "Crude Oil",
            Asset::Gold => "Gold",
            Asset::Bonds => "US Treasury Bonds",
        };
        f.write_str(name)
    }
}

/// The three simulated strategies.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    BuyHold,
    TailHedge,
    TacticalAllocation,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::BuyHold,
        StrategyKind::TailHedge,
        StrategyKind::TacticalAllocation,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            StrategyKind::BuyHold => "buy_hold",
            StrategyKind::TailHedge => "tail_hedge",
            StrategyKind::TacticalAllocation => "tactical_allocation",
        }
    }

    pub fn from_slug(slug: &str) -> Option<StrategyKind> {
        StrategyKind::ALL.iter().copied().find(|s| s.slug() == slug)
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            StrategyKind::BuyHold => "Buy & Hold",
            StrategyKind::TailHedge => "Tail Hedge",
            StrategyKind::TacticalAllocation => "Tactical Allocation",
        };
        f.write_str(name)
    }
}

/// One asset's daily fractional returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Day-aligned daily returns for all four assets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetReturns {
    dates: Vec<NaiveDate>,
    sp500: Vec<f64>,
    crude: Vec<f64>,
    gold: Vec<f64>,
    bonds: Vec<f64>,
}

impl AssetReturns {
    pub fn new(
        dates: Vec<NaiveDate>,
        sp500: Vec<f64>,
        crude: Vec<f64>,
        gold: Vec<f64>,
        bonds: Vec<f64>,
    ) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::EmptyInput {
                what: "asset returns",
            });
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::DuplicateDate { date: pair[1] });
            }
        }
        for series in [&sp500, &crude, &gold, &bonds] {
            if series.len() != dates.len() {
                return Err(Error::LengthMismatch {
                    what: "asset series vs dates",
                    left: series.len(),
                    right: dates.len(),
                });
            }
            if !series.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteInput { what: "asset returns" });
            }
        }
        Ok(AssetReturns {
            dates,
            sp500,
            crude,
            gold,
            bonds,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn values(&self, asset: Asset) -> &[f64] {
        match asset {
            Asset::Sp500 => &self.sp500,
            Asset::Crude => &self.crude,
            Asset::Gold => &self.gold,
            Asset::Bonds => &self.bonds,
        }
    }

    pub fn series(&self, asset: Asset) -> ReturnSeries {
        ReturnSeries {
            dates: self.dates.clone(),
            values: self.values(asset).to_vec(),
        }
    }

    /// Restrict to the given dates, which must all be present.
    pub fn subset(&self, dates: &[NaiveDate]) -> Result<AssetReturns> {
        let mut index = Vec::with_capacity(dates.len());
        for &date in dates {
            match self.dates.binary_search(&date) {
                Ok(i) => index.push(i),
                Err(_) => {
                    return Err(Error::DateMisalignment {
                        detail: format!("asset returns have no row for {date}"),
                    })
                }
            }
        }
        let pick = |series: &[f64]| index.iter().map(|&i| series[i]).collect();
        AssetReturns::new(
            dates.to_vec(),
            pick(&self.sp500),
            pick(&self.crude),
            pick(&self.gold),
            pick(&self.bonds),
        )
    }
}

/// Read asset returns from CSV with columns date, sp500, crude, gold, bonds
/// (any order). Every cell must be present and finite.
pub fn load_asset_returns(path: &Path) -> Result<AssetReturns> {
    let panel = load_panel(path, "date")?;
    if panel.has_missing() {
        return Err(Error::MissingValues {
            count: panel.missing_count(),
        });
    }
    let mut found = [false; 4];
    for name in panel.names() {
        match Asset::from_slug(name) {
            Some(asset) => found[asset as usize] = true,
            None => {
                return Err(Error::ColumnMismatch {
                    detail: format!("unexpected asset-returns column {name:?}"),
                })
            }
        }
    }
    for asset in Asset::ALL {
        if !found[asset as usize] {
            return Err(Error::ColumnMismatch {
                detail: format!("asset-returns CSV is missing column {:?}", asset.slug()),
            });
        }
    }
    let column = |asset: Asset| -> Vec<f64> {
        let j = panel.names().iter().position(|n| n == asset.slug()).unwrap();
        panel.values().column(j).iter().copied().collect()
    };
    AssetReturns::new(
        panel.dates().to_vec(),
        column(Asset::Sp500),
        column(Asset::Crude),
        column(Asset::Gold),
        column(Asset::Bonds),
    )
}

/// Write asset returns in the format [`load_asset_returns`] reads.
pub fn write_asset_returns_csv(assets: &AssetReturns, path: &Path) -> Result<()> {
    let names: Vec<String> = Asset::ALL.iter().map(|a| a.slug().to_string()).collect();
    let values = nalgebra::DMatrix::from_fn(assets.len(), 4, |i, j| {
        assets.values(Asset::ALL[j])[i]
    });
    let panel = Panel::new(assets.dates.clone(), names, values)?;
    crate::panel::write_panel_csv(&panel, path, "date")
}

/// Predicted regime per day. The value for date t must have been produced
/// from information through the previous day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSignal {
    dates: Vec<NaiveDate>,
    regimes: Vec<usize>,
}

impl RegimeSignal {
    pub fn new(dates: Vec<NaiveDate>, regimes: Vec<usize>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::EmptyInput {
                what: "regime signal",
            });
        }
        if regimes.len() != dates.len() {
            return Err(Error::LengthMismatch {
                what: "regimes vs dates",
                left: regimes.len(),
                right: dates.len(),
            });
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::DuplicateDate { date: pair[1] });
            }
        }
        for (&date, &regime) in dates.iter().zip(&regimes) {
            if regime != 1 && regime != 2 {
                return Err(Error::InvalidRegime { date, regime });
            }
        }
        Ok(RegimeSignal { dates, regimes })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn regimes(&self) -> &[usize] {
        &self.regimes
    }
}

fn check_aligned(what: &str, signal: &RegimeSignal, dates: &[NaiveDate]) -> Result<()> {
    if signal.dates != dates {
        return Err(Error::DateMisalignment {
            detail: format!("signal dates do not match {what} dates"),
        });
    }
    Ok(())
}

fn check_benchmark_aligned(
    benchmark: Option<&ReturnSeries>,
    dates: &[NaiveDate],
) -> Result<Option<Vec<f64>>> {
    match benchmark {
        None => Ok(None),
        Some(series) => {
            if series.dates != dates {
                return Err(Error::DateMisalignment {
                    detail: "benchmark dates do not match strategy dates".to_string(),
                });
            }
            Ok(Some(series.values.clone()))
        }
    }
}

/// Passive long position over the whole window.
pub fn buy_hold(
    asset: &ReturnSeries,
    benchmark: Option<&ReturnSeries>,
    opts: &StatsOptions,
) -> Result<BacktestReport> {
    let bench = check_benchmark_aligned(benchmark, &asset.dates)?;
    performance_stats(&asset.dates, &asset.values, bench.as_deref(), opts)
}

/// Long the asset while the signal reads regime 1, short it while the signal
/// reads regime 2.
pub fn tail_hedge(
    signal: &RegimeSignal,
    asset: &ReturnSeries,
    benchmark: Option<&ReturnSeries>,
    opts: &StatsOptions,
) -> Result<BacktestReport> {
    check_aligned("asset", signal, &asset.dates)?;
    let bench = check_benchmark_aligned(benchmark, &asset.dates)?;
    let daily: Vec<f64> = asset
        .values
        .iter()
        .zip(&signal.regimes)
        .map(|(&r, &regime)| if regime == 1 { r } else { -r })
        .collect();
    performance_stats(&asset.dates, &daily, bench.as_deref(), opts)
}

/// 60/40 equity/bond portfolio in regime 1; equal-weight short-equity,
/// short-oil, long-gold, long-bond portfolio in regime 2. Weights reset to
/// target every day.
pub fn tactical_allocation(
    signal: &RegimeSignal,
    assets: &AssetReturns,
    benchmark: Option<&ReturnSeries>,
    opts: &StatsOptions,
) -> Result<BacktestReport> {
    check_aligned("asset", signal, &assets.dates)?;
    let bench = check_benchmark_aligned(benchmark, &assets.dates)?;
    let daily: Vec<f64> = (0..assets.len())
        .map(|t| {
            let (sp, cr, go, bo) = (
                assets.sp500[t],
                assets.crude[t],
                assets.gold[t],
                assets.bonds[t],
            );
            if signal.regimes[t] == 1 {
                0.6 * sp + 0.4 * bo
            } else {
                0.25 * (-sp - cr + go + bo)
            }
        })
        .collect();
    performance_stats(&assets.dates, &daily, bench.as_deref(), opts)
}

/// One row of the metric-to-performance correlation study. `r` and
/// `p_value` are absent when the correlation is undefined for the sample
/// (fewer than three models, or a metric constant across models).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub metric: String,
    pub stat: String,
    pub r: Option<f64>,
    pub p_value: Option<f64>,
}

fn cv_metric(report: &CvReport, metric: &str) -> Result<f64> {
    Ok(match metric {
        "auc" => report.auc,
        "accuracy" => report.accuracy,
        "f1" => report.f1,
        _ => {
            return Err(Error::MissingStat {
                stat: metric.to_string(),
            })
        }
    })
}

/// Pearson correlation between one cross-validation metric and one backtest
/// statistic across models. The two lists must be aligned (same model order).
pub fn correlate_metrics(
    cv: &[CvReport],
    reports: &[BacktestReport],
    metric: &str,
    stat: &str,
) -> Result<(f64, f64)> {
    if cv.len() != reports.len() {
        return Err(Error::LengthMismatch {
            what: "cv reports vs backtest reports",
            left: cv.len(),
            right: reports.len(),
        });
    }
    let x: Vec<f64> = cv
        .iter()
        .map(|report| cv_metric(report, metric))
        .collect::<Result<_>>()?;
    let y: Vec<f64> = reports
        .iter()
        .map(|report| report.stat(stat))
        .collect::<Result<_>>()?;
    pearson(&x, &y)
}
