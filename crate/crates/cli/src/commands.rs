//! The pipeline stage commands.
//!
//! Each command reads its upstream artifacts from the run directory, does
//! one stage of work, writes its own artifacts, and returns a one-line
//! summary. `run` chains them all; because every stage round-trips through
//! the same files, a chained run and a stepwise run produce identical
//! artifacts.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use regimes_core::backtest::pipeline::{causal_signal, correlation_table};
use regimes_core::backtest::{
    buy_hold, load_asset_returns, tactical_allocation, tail_hedge, write_asset_returns_csv, Asset,
    BacktestReport, RegimeSignal, StatsOptions, StrategyKind,
};
use regimes_core::classify::{cross_validate, fit, ClassifierKind, RegimeClassifier};
use regimes_core::cluster::{assign, select_k, ClusterModel};
use regimes_core::panel::{fit_standardizer, impute_forward, load_panel, split_at, write_panel_csv};
use regimes_core::pca::{explained_variance_table, fit_pca, select_components, transform};
use regimes_core::synth::generate_market;

use crate::artifacts::{
    read_cv_table, read_json, read_labels, read_scores, write_agreement, write_correlations,
    write_cv_folds, write_cv_table, write_explained_variance, write_json, write_labels,
    write_report_table, write_scores, write_silhouettes, write_wealth,
};
use crate::config::Workspace;
use crate::error::{CliError, Result};

/// What `ingest` records about the raw panel.
#[derive(Debug, Serialize)]
struct IngestSummary {
    rows: usize,
    series: usize,
    missing_imputed: usize,
    train_rows: usize,
    test_rows: usize,
    split_date: NaiveDate,
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::Artifact {
        path: path.to_path_buf(),
        detail: format!("cannot create directory: {e}"),
    })
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => ensure_dir(parent),
        _ => Ok(()),
    }
}

/// Load a user-supplied input file, with a pointer to `synth` when absent.
fn load_input<T>(path: &Path, loader: impl FnOnce(&Path) -> regimes_core::Result<T>) -> Result<T> {
    if !path.is_file() {
        return Err(CliError::Artifact {
            path: path.to_path_buf(),
            detail: "input not found; point the config at real data or generate a fixture with \
                     the synth command"
                .to_string(),
        });
    }
    Ok(loader(path)?)
}

pub fn ingest(ws: &Workspace) -> Result<String> {
    let cfg = &ws.cfg;
    let raw = load_input(&cfg.panel_csv, |p| load_panel(p, "date"))?;
    let missing = raw.missing_count();
    let imputed = impute_forward(&raw).map_err(|e| e.at_stage("impute"))?;
    let split = split_at(&imputed, cfg.split_date).map_err(|e| e.at_stage("split"))?;

    write_panel_csv(&split.train, &ws.path("train.csv"), "date")?;
    write_panel_csv(&split.test, &ws.path("test.csv"), "date")?;
    let summary = IngestSummary {
        rows: imputed.rows(),
        series: imputed.cols(),
        missing_imputed: missing,
        train_rows: split.train.rows(),
        test_rows: split.test.rows(),
        split_date: cfg.split_date,
    };
    write_json(&ws.path("ingest.json"), &summary)?;

    Ok(format!(
        "ingest ok rows={} series={} imputed={} train={} test={} dir={}",
        summary.rows,
        summary.series,
        summary.missing_imputed,
        summary.train_rows,
        summary.test_rows,
        ws.dir.display()
    ))
}

pub fn pca(ws: &Workspace) -> Result<String> {
    let cfg = &ws.cfg;
    let train = load_panel(&ws.require("train.csv", "ingest")?, "date")?;
    let test = load_panel(&ws.require("test.csv", "ingest")?, "date")?;

    let standardizer = fit_standardizer(&train).map_err(|e| e.at_stage("standardize"))?;
    let train_std = standardizer.apply(&train).map_err(|e| e.at_stage("standardize"))?;
    let test_std = standardizer.apply(&test).map_err(|e| e.at_stage("standardize"))?;

    let mut model = fit_pca(&train_std, &standardizer).map_err(|e| e.at_stage("pca"))?;
    let d = select_components(&model, cfg.variance_threshold).map_err(|e| e.at_stage("pca"))?;
    model.set_n_selected(d).map_err(|e| e.at_stage("pca"))?;
    let table = explained_variance_table(&model);
    let train_scores = transform(&model, &train_std, d).map_err(|e| e.at_stage("pca"))?;
    let test_scores = transform(&model, &test_std, d).map_err(|e| e.at_stage("pca"))?;

    write_json(&ws.path("pca_model.json"), &model)?;
    write_explained_variance(&ws.path("explained_variance.csv"), &table)?;
    write_scores(&ws.path("train_scores.csv"), &train_scores)?;
    write_scores(&ws.path("test_scores.csv"), &test_scores)?;

    Ok(format!(
        "pca ok components={} of={} explained_pct={} dir={}",
        d,
        model.dim(),
        table[d - 1].cumulative_pct,
        ws.dir.display()
    ))
}

pub fn cluster(ws: &Workspace) -> Result<String> {
    let cfg = &ws.cfg;
    let train_scores = read_scores(&ws.require("train_scores.csv", "pca")?)?;
    let model = select_k(&train_scores, cfg.k_min, cfg.k_max, cfg.n_init, cfg.seed)
        .map_err(|e| e.at_stage("cluster"))?;

    write_json(&ws.path("cluster_model.json"), &model)?;
    write_silhouettes(&ws.path("silhouette_by_k.csv"), &model.silhouette_by_k)?;
    write_labels(&ws.path("train_labels.csv"), &train_scores.dates, &model.train_labels)?;

    Ok(format!(
        "cluster ok k={} silhouette={} dir={}",
        model.k,
        model.silhouette_by_k[&model.k],
        ws.dir.display()
    ))
}

pub fn train(ws: &Workspace) -> Result<String> {
    let cfg = &ws.cfg;
    let train_scores = read_scores(&ws.require("train_scores.csv", "pca")?)?;
    let labels_path = ws.require("train_labels.csv", "cluster")?;
    let (label_dates, labels) = read_labels(&labels_path)?;
    if label_dates != train_scores.dates {
        return Err(CliError::Artifact {
            path: labels_path,
            detail: "label dates do not match train_scores.csv; rerun the cluster command"
                .to_string(),
        });
    }

    let mut reports = Vec::with_capacity(cfg.classifiers.len());
    let mut models = Vec::with_capacity(cfg.classifiers.len());
    for &kind in &cfg.classifiers {
        let report = cross_validate(
            kind,
            &train_scores,
            &labels,
            &cfg.hyper,
            cfg.cv_folds,
            cfg.cv_mode,
            cfg.seed,
        )
        .map_err(|e| e.at_stage("classify"))?;
        let model =
            fit(kind, &train_scores, &labels, &cfg.hyper).map_err(|e| e.at_stage("classify"))?;
        reports.push(report);
        models.push(model);
    }

    write_cv_table(&ws.path("cv_report.csv"), &reports)?;
    write_cv_folds(&ws.path("cv_folds.csv"), &reports)?;
    ensure_dir(&ws.path("models"))?;
    for model in &models {
        write_json(
            &ws.path(&format!("models/{}.json", model.kind().slug())),
            model,
        )?;
    }

    let mean_auc = reports.iter().map(|r| r.auc).sum::<f64>() / reports.len() as f64;
    Ok(format!(
        "train ok models={} folds={} mean_auc={} dir={}",
        models.len(),
        cfg.cv_folds,
        mean_auc,
        ws.dir.display()
    ))
}

pub fn backtest(ws: &Workspace) -> Result<String> {
    let cfg = &ws.cfg;
    let train_scores = read_scores(&ws.require("train_scores.csv", "pca")?)?;
    let test_scores = read_scores(&ws.require("test_scores.csv", "pca")?)?;
    let cluster: ClusterModel = read_json(&ws.require("cluster_model.json", "cluster")?)?;
    let cv = read_cv_table(&ws.require("cv_report.csv", "train")?)?;
    let mut models: Vec<RegimeClassifier> = Vec::with_capacity(cfg.classifiers.len());
    for &kind in &cfg.classifiers {
        let path = ws.require(&format!("models/{}.json", kind.slug()), "train")?;
        models.push(read_json(&path)?);
    }
    let assets = load_input(&cfg.assets_csv, load_asset_returns)?;

    let test_labels = assign(&cluster, &test_scores).map_err(|e| e.at_stage("cluster"))?;
    write_labels(&ws.path("test_labels.csv"), &test_scores.dates, &test_labels)?;
    let test_assets = assets
        .subset(&test_scores.dates)
        .map_err(|e| e.at_stage("backtest"))?;

    ensure_dir(&ws.path("predictions"))?;
    ensure_dir(&ws.path("signals"))?;
    ensure_dir(&ws.path("wealth"))?;

    let mut signals: Vec<(ClassifierKind, RegimeSignal)> = Vec::with_capacity(models.len());
    let mut agreement = Vec::with_capacity(models.len());
    for model in &models {
        let kind = model.kind();
        let predictions = model.predict(&test_scores).map_err(|e| e.at_stage("signal"))?;
        write_labels(
            &ws.path(&format!("predictions/{}.csv", kind.slug())),
            &test_scores.dates,
            &predictions,
        )?;
        let signal = causal_signal(model, &train_scores, &test_scores, &predictions)
            .map_err(|e| e.at_stage("signal"))?;
        write_labels(
            &ws.path(&format!("signals/{}.csv", kind.slug())),
            signal.dates(),
            signal.regimes(),
        )?;
        let matched = predictions
            .iter()
            .zip(&test_labels)
            .filter(|(p, l)| p == l)
            .count();
        agreement.push((kind, matched as f64 / test_labels.len() as f64));
        signals.push((kind, signal));
    }
    write_agreement(&ws.path("agreement.csv"), &agreement)?;

    let opts = StatsOptions {
        excess_kurtosis: cfg.excess_kurtosis,
    };

    if cfg.strategies.contains(&StrategyKind::BuyHold) {
        let mut owned: Vec<(Asset, BacktestReport)> = Vec::with_capacity(Asset::ALL.len());
        for asset in Asset::ALL {
            let report = buy_hold(&test_assets.series(asset), None, &opts)
                .map_err(|e| e.at_stage("backtest"))?;
            write_wealth(
                &ws.path(&format!("wealth/buy_hold_{}.csv", asset.slug())),
                &report,
            )?;
            owned.push((asset, report));
        }
        let rows: Vec<(Vec<String>, &BacktestReport)> = owned
            .iter()
            .map(|(asset, report)| (vec![asset.slug().to_string()], report))
            .collect();
        write_report_table(&ws.path("buy_hold.csv"), &["asset"], &rows)?;
    }

    if cfg.strategies.contains(&StrategyKind::TailHedge) {
        let mut owned: Vec<(ClassifierKind, Asset, BacktestReport)> = Vec::new();
        for (kind, signal) in &signals {
            for asset in Asset::ALL {
                let series = test_assets.series(asset);
                let report = tail_hedge(signal, &series, Some(&series), &opts)
                    .map_err(|e| e.at_stage("backtest"))?;
                write_wealth(
                    &ws.path(&format!(
                        "wealth/tail_hedge_{}_{}.csv",
                        kind.slug(),
                        asset.slug()
                    )),
                    &report,
                )?;
                owned.push((*kind, asset, report));
            }
        }
        let rows: Vec<(Vec<String>, &BacktestReport)> = owned
            .iter()
            .map(|(kind, asset, report)| {
                (
                    vec![kind.slug().to_string(), asset.slug().to_string()],
                    report,
                )
            })
            .collect();
        write_report_table(&ws.path("tail_hedge.csv"), &["model", "asset"], &rows)?;
    }

    if cfg.strategies.contains(&StrategyKind::TacticalAllocation) {
        let bench = test_assets.series(Asset::Sp500);
        let mut owned: Vec<(ClassifierKind, BacktestReport)> = Vec::with_capacity(signals.len());
        for (kind, signal) in &signals {
            let report = tactical_allocation(signal, &test_assets, Some(&bench), &opts)
                .map_err(|e| e.at_stage("backtest"))?;
            write_wealth(
                &ws.path(&format!("wealth/tactical_allocation_{}.csv", kind.slug())),
                &report,
            )?;
            owned.push((*kind, report));
        }
        let rows: Vec<(Vec<String>, &BacktestReport)> = owned
            .iter()
            .map(|(kind, report)| (vec![kind.slug().to_string()], report))
            .collect();
        write_report_table(&ws.path("tactical.csv"), &["model"], &rows)?;

        // The correlation study relates CV metrics to tactical performance
        // across models, so it needs the tactical reports in model order.
        let reports: Vec<BacktestReport> =
            owned.into_iter().map(|(_, report)| report).collect();
        let table = correlation_table(&cv, &reports).map_err(|e| e.at_stage("correlate"))?;
        write_correlations(&ws.path("correlations.csv"), &table)?;
    }

    Ok(format!(
        "backtest ok models={} strategies={} test_days={} dir={}",
        models.len(),
        cfg.strategies.len(),
        test_scores.dates.len(),
        ws.dir.display()
    ))
}

pub fn run(ws: &Workspace) -> Result<String> {
    println!("{}", ingest(ws)?);
    println!("{}", pca(ws)?);
    println!("{}", cluster(ws)?);
    println!("{}", train(ws)?);
    println!("{}", backtest(ws)?);
    Ok(format!("run ok dir={}", ws.dir.display()))
}

pub fn synth(ws: &Workspace) -> Result<String> {
    let cfg = &ws.cfg;
    let market = generate_market(&cfg.synth)?;

    ensure_parent(&cfg.panel_csv)?;
    ensure_parent(&cfg.assets_csv)?;
    write_panel_csv(&market.panel, &cfg.panel_csv, "date")?;
    write_asset_returns_csv(&market.assets, &cfg.assets_csv)?;
    write_labels(
        &ws.path("truth_regimes.csv"),
        market.panel.dates(),
        &market.regimes,
    )?;

    let crisis_days = market.regimes.iter().filter(|&&r| r == 2).count();
    Ok(format!(
        "synth ok days={} series={} crisis_days={} panel={} assets={} dir={}",
        market.panel.rows(),
        market.panel.cols(),
        crisis_days,
        cfg.panel_csv.display(),
        cfg.assets_csv.display(),
        ws.dir.display()
    ))
}
