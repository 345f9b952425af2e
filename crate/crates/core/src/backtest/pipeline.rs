//! The end-to-end run: panel in, regime models and strategy reports out.
//!
//! Stage order is fixed: impute, split, standardize, pca, cluster,
//! classify, signal, backtest, correlate. Errors carry the name of the
//! stage that raised them. Test-side rows only ever meet statistics fitted
//! on the training side.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::backtest::{
    buy_hold, correlate_metrics, tactical_allocation, tail_hedge, Asset, AssetReturns,
    BacktestReport, CorrelationRow, RegimeSignal, StatsOptions, StrategyKind,
};
use crate::classify::{
    cross_validate, fit, ClassifierKind, CvMode, CvReport, HyperParams, RegimeClassifier,
};
use crate::cluster::{assign, select_k, ClusterModel};
use crate::error::{Error, Result};
use crate::panel::{fit_standardizer, impute_forward, split_at, Panel, Standardizer};
use crate::pca::{
    explained_variance_table, fit_pca, select_components, transform, ExplainedVarianceRow,
    PcaModel, ScoreMatrix,
};

/// CV metrics and backtest statistics crossed by the correlation study.
pub const CORRELATION_METRICS: [&str; 3] = ["auc", "accuracy", "f1"];
pub const CORRELATION_STATS: [&str; 3] = [
    "cumulative_return_pct",
    "annualized_return_pct",
    "max_drawdown_pct",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Last training date; later rows are out-of-sample.
    pub split_date: NaiveDate,
    /// Keep the smallest component count explaining this fraction of variance.
    pub variance_threshold: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// k-means restarts per candidate k.
    pub n_init: usize,
    pub cv_folds: usize,
    pub cv_mode: CvMode,
    pub hyper: HyperParams,
    pub stats: StatsOptions,
    pub classifiers: Vec<ClassifierKind>,
    pub strategies: Vec<StrategyKind>,
    pub seed: u64,
}

impl PipelineConfig {
    /// The reference configuration, parameterized only by the split date.
    pub fn with_split(split_date: NaiveDate) -> Self {
        PipelineConfig {
            split_date,
            variance_threshold: 0.90,
            k_min: 2,
            k_max: 6,
            n_init: 100,
            cv_folds: 10,
            cv_mode: CvMode::Block,
            hyper: HyperParams::default(),
            stats: StatsOptions::default(),
            classifiers: ClassifierKind::ALL.to_vec(),
            strategies: StrategyKind::ALL.to_vec(),
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.variance_threshold.is_finite()
            || self.variance_threshold <= 0.0
            || self.variance_threshold > 1.0
        {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "variance_threshold must be in (0, 1], got {}",
                    self.variance_threshold
                ),
            });
        }
        if self.k_min < 2 || self.k_min > self.k_max {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "k range must satisfy 2 <= k_min <= k_max, got {}..{}",
                    self.k_min, self.k_max
                ),
            });
        }
        if self.n_init == 0 {
            return Err(Error::InvalidConfig {
                detail: "n_init must be positive".to_string(),
            });
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidConfig {
                detail: format!("cv_folds must be at least 2, got {}", self.cv_folds),
            });
        }
        if self.classifiers.is_empty() {
            return Err(Error::InvalidConfig {
                detail: "classifier set must not be empty".to_string(),
            });
        }
        let unique: BTreeSet<_> = self.classifiers.iter().collect();
        if unique.len() != self.classifiers.len() {
            return Err(Error::InvalidConfig {
                detail: "classifier set contains duplicates".to_string(),
            });
        }
        let unique: BTreeSet<_> = self.strategies.iter().collect();
        if unique.len() != self.strategies.len() {
            return Err(Error::InvalidConfig {
                detail: "strategy set contains duplicates".to_string(),
            });
        }
        self.hyper.validate()
    }

    pub fn runs(&self, strategy: StrategyKind) -> bool {
        self.strategies.contains(&strategy)
    }
}

/// Everything a run produces, keyed by classifier where per-model.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub imputed: Panel,
    pub standardizer: Standardizer,
    pub pca: PcaModel,
    pub explained_variance: Vec<ExplainedVarianceRow>,
    pub train_scores: ScoreMatrix,
    pub test_scores: ScoreMatrix,
    pub cluster: ClusterModel,
    /// Cluster assignment of the test rows (ground truth for agreement).
    pub test_labels: Vec<usize>,
    pub cv_reports: Vec<CvReport>,
    pub models: Vec<RegimeClassifier>,
    /// Per-model regime predicted from each test day's own features.
    pub test_predictions: BTreeMap<ClassifierKind, Vec<usize>>,
    /// Per-model tradable signal: the prediction shifted forward one day.
    pub signals: BTreeMap<ClassifierKind, RegimeSignal>,
    /// Fraction of test days where the prediction matches the cluster label.
    pub agreement: BTreeMap<ClassifierKind, f64>,
    pub buy_hold: BTreeMap<Asset, BacktestReport>,
    pub tail_hedge: BTreeMap<ClassifierKind, BTreeMap<Asset, BacktestReport>>,
    pub tactical: BTreeMap<ClassifierKind, BacktestReport>,
    pub correlations: Vec<CorrelationRow>,
}

/// Run the full pipeline on an imputable feature panel and aligned asset
/// returns. `assets` must cover every test date.
pub fn run_pipeline(
    panel: &Panel,
    assets: &AssetReturns,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    cfg.validate()?;

    let imputed = impute_forward(panel).map_err(|e| e.at_stage("impute"))?;
    let split = split_at(&imputed, cfg.split_date).map_err(|e| e.at_stage("split"))?;

    let standardizer = fit_standardizer(&split.train).map_err(|e| e.at_stage("standardize"))?;
    let train_std = standardizer
        .apply(&split.train)
        .map_err(|e| e.at_stage("standardize"))?;
    let test_std = standardizer
        .apply(&split.test)
        .map_err(|e| e.at_stage("standardize"))?;

    let mut pca = fit_pca(&train_std, &standardizer).map_err(|e| e.at_stage("pca"))?;
    let d = select_components(&pca, cfg.variance_threshold).map_err(|e| e.at_stage("pca"))?;
    pca.set_n_selected(d).map_err(|e| e.at_stage("pca"))?;
    let explained_variance = explained_variance_table(&pca);
    let train_scores = transform(&pca, &train_std, d).map_err(|e| e.at_stage("pca"))?;
    let test_scores = transform(&pca, &test_std, d).map_err(|e| e.at_stage("pca"))?;

    let cluster = select_k(&train_scores, cfg.k_min, cfg.k_max, cfg.n_init, cfg.seed)
        .map_err(|e| e.at_stage("cluster"))?;
    let test_labels = assign(&cluster, &test_scores).map_err(|e| e.at_stage("cluster"))?;

    // The classifiers are binary; a run whose best silhouette is not at
    // k=2 has no two-regime structure to learn.
    if cluster.k != 2 {
        return Err(Error::NotBinary { found: cluster.k }.at_stage("classify"));
    }

    let mut cv_reports = Vec::with_capacity(cfg.classifiers.len());
    let mut models = Vec::with_capacity(cfg.classifiers.len());
    for &kind in &cfg.classifiers {
        let report = cross_validate(
            kind,
            &train_scores,
            &cluster.train_labels,
            &cfg.hyper,
            cfg.cv_folds,
            cfg.cv_mode,
            cfg.seed,
        )
        .map_err(|e| e.at_stage("classify"))?;
        let model = fit(kind, &train_scores, &cluster.train_labels, &cfg.hyper)
            .map_err(|e| e.at_stage("classify"))?;
        cv_reports.push(report);
        models.push(model);
    }

    let mut test_predictions = BTreeMap::new();
    let mut signals = BTreeMap::new();
    let mut agreement = BTreeMap::new();
    for model in &models {
        let predictions = model
            .predict(&test_scores)
            .map_err(|e| e.at_stage("signal"))?;
        let signal = causal_signal(model, &train_scores, &test_scores, &predictions)
            .map_err(|e| e.at_stage("signal"))?;
        let hits = predictions
            .iter()
            .zip(&test_labels)
            .filter(|(p, t)| p == t)
            .count();
        agreement.insert(model.kind(), hits as f64 / predictions.len() as f64);
        test_predictions.insert(model.kind(), predictions);
        signals.insert(model.kind(), signal);
    }

    let test_assets = assets
        .subset(&test_scores.dates)
        .map_err(|e| e.at_stage("backtest"))?;
    let sp500 = test_assets.series(Asset::Sp500);

    let mut buy_hold_reports = BTreeMap::new();
    if cfg.runs(StrategyKind::BuyHold) {
        for asset in Asset::ALL {
            let series = test_assets.series(asset);
            let report =
                buy_hold(&series, None, &cfg.stats).map_err(|e| e.at_stage("backtest"))?;
            buy_hold_reports.insert(asset, report);
        }
    }

    let mut tail_hedge_reports: BTreeMap<ClassifierKind, BTreeMap<Asset, BacktestReport>> =
        BTreeMap::new();
    if cfg.runs(StrategyKind::TailHedge) {
        for (&kind, signal) in &signals {
            let mut per_asset = BTreeMap::new();
            for asset in Asset::ALL {
                let series = test_assets.series(asset);
                let report = tail_hedge(signal, &series, Some(&series), &cfg.stats)
                    .map_err(|e| e.at_stage("backtest"))?;
                per_asset.insert(asset, report);
            }
            tail_hedge_reports.insert(kind, per_asset);
        }
    }

    let mut tactical_reports = BTreeMap::new();
    if cfg.runs(StrategyKind::TacticalAllocation) {
        for (&kind, signal) in &signals {
            let report = tactical_allocation(signal, &test_assets, Some(&sp500), &cfg.stats)
                .map_err(|e| e.at_stage("backtest"))?;
            tactical_reports.insert(kind, report);
        }
    }

    let correlations = if cfg.runs(StrategyKind::TacticalAllocation) {
        let ordered: Vec<BacktestReport> = cfg
            .classifiers
            .iter()
            .map(|kind| tactical_reports[kind].clone())
            .collect();
        correlation_table(&cv_reports, &ordered).map_err(|e| e.at_stage("correlate"))?
    } else {
        Vec::new()
    };

    Ok(PipelineOutput {
        imputed,
        standardizer,
        pca,
        explained_variance,
        train_scores,
        test_scores,
        cluster,
        test_labels,
        cv_reports,
        models,
        test_predictions,
        signals,
        agreement,
        buy_hold: buy_hold_reports,
        tail_hedge: tail_hedge_reports,
        tactical: tactical_reports,
        correlations,
    })
}

/// Build the causal signal for the test window: the value for test day j is
/// the prediction from day j-1's features, and the first test day uses the
/// last training row.
pub fn causal_signal(
    model: &RegimeClassifier,
    train_scores: &ScoreMatrix,
    test_scores: &ScoreMatrix,
    test_predictions: &[usize],
) -> Result<RegimeSignal> {
    let last = train_scores.scores.nrows() - 1;
    let carry_scores = ScoreMatrix {
        dates: vec![train_scores.dates[last]],
        scores: DMatrix::from_fn(1, train_scores.scores.ncols(), |_, j| {
            train_scores.scores[(last, j)]
        }),
    };
    let carry = model.predict(&carry_scores)?[0];

    let mut regimes = Vec::with_capacity(test_predictions.len());
    regimes.push(carry);
    regimes.extend_from_slice(&test_predictions[..test_predictions.len() - 1]);
    RegimeSignal::new(test_scores.dates.clone(), regimes)
}

/// Cross every CV metric with every strategy statistic. Undefined cells
/// (constant metric, too few models) come back with empty values rather
/// than failing the run.
pub fn correlation_table(
    cv: &[CvReport],
    reports: &[BacktestReport],
) -> Result<Vec<CorrelationRow>> {
    let mut rows = Vec::with_capacity(CORRELATION_METRICS.len() * CORRELATION_STATS.len());
    for metric in CORRELATION_METRICS {
        for stat in CORRELATION_STATS {
            let (r, p_value) = match correlate_metrics(cv, reports, metric, stat) {
                Ok((r, p)) => (Some(r), Some(p)),
                Err(
                    Error::ZeroVarianceSeries { .. } | Error::TooFewObservations { .. },
                ) => (None, None),
                Err(other) => return Err(other),
            };
            rows.push(CorrelationRow {
                metric: metric.to_string(),
                stat: stat.to_string(),
                r,
                p_value,
            });
        }
    }
    Ok(rows)
}
