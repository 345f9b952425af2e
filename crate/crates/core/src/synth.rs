//! Synthetic data with planted regime structure.
//!
//! The generator exists so the whole pipeline can be exercised against known
//! ground truth: a two-state regime path drives both the feature panel (a
//! mean shift along a random direction) and the asset returns (regime-
//! dependent drift and volatility, with equities falling in regime 2).

use chrono::{Days, NaiveDate};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::backtest::AssetReturns;
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::pca::ScoreMatrix;

/// Regime-block length bounds in days, inclusive. The caps keep every
/// same-regime run at 40 days or less, so any contiguous window of 41+
/// days sees both regimes; contiguous cross-validation folds of that size
/// never go single-class.
const NORMAL_BLOCK: (usize, usize) = (25, 40);
const CRISIS_BLOCK: (usize, usize) = (8, 18);

/// Daily (drift, volatility) per asset and regime. Regime 2 is a crisis:
/// equities and oil sell off, gold and bonds rally.
const NORMAL_PARAMS: [(f64, f64); 4] = [
    (0.0006, 0.008),  // sp500
    (0.0004, 0.012),  // crude
    (0.0001, 0.007),  // gold
    (0.0002, 0.004),  // bonds
];
// Crisis drift is strong relative to crisis volatility on purpose: the
// fixture must realize "equities fall in regime 2" inside any plausible
// test window, not merely in expectation.
const CRISIS_PARAMS: [(f64, f64); 4] = [
    (-0.0060, 0.012),
    (-0.0050, 0.015),
    (0.0012, 0.010),
    (0.0008, 0.005),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_days: usize,
    pub n_series: usize,
    /// Distance between the two regime means in the feature panel, in units
    /// of the per-series noise standard deviation.
    pub separation: f64,
    pub start_date: NaiveDate,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_days: 756,
            n_series: 26,
            separation: 6.0,
            // Placed so the reference split date 2013-12-31 lands exactly
            // two thirds of the way through the default three-year market.
            start_date: NaiveDate::from_ymd_opt(2012, 8, 15).expect("valid date"),
            seed: 42,
        }
    }
}

/// A generated market: feature panel, asset returns, and the regime truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthMarket {
    pub panel: Panel,
    pub assets: AssetReturns,
    /// Planted regime per day, values in {1, 2}.
    pub regimes: Vec<usize>,
}

fn sequential_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    (0..n).map(|i| start + Days::new(i as u64)).collect()
}

/// Alternating normal/crisis blocks, starting normal, truncated to `n`.
fn regime_path(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut regimes = Vec::with_capacity(n);
    let mut crisis = false;
    while regimes.len() < n {
        let (lo, hi) = if crisis { CRISIS_BLOCK } else { NORMAL_BLOCK };
        let len = rng.random_range(lo..=hi);
        let regime = if crisis { 2 } else { 1 };
        for _ in 0..len.min(n - regimes.len()) {
            regimes.push(regime);
        }
        crisis = !crisis;
    }
    regimes
}

/// Random unit vector in `dim` dimensions.
fn unit_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Generate a market whose features and asset returns are both driven by a
/// planted two-state regime path.
pub fn generate_market(cfg: &SynthConfig) -> Result<SynthMarket> {
    if cfg.n_days < 2 {
        return Err(Error::InvalidConfig {
            detail: format!("n_days must be at least 2, got {}", cfg.n_days),
        });
    }
    if cfg.n_series == 0 {
        return Err(Error::InvalidConfig {
            detail: "n_series must be positive".to_string(),
        });
    }
    if !cfg.separation.is_finite() || cfg.separation < 0.0 {
        return Err(Error::InvalidConfig {
            detail: format!("separation must be finite and non-negative, got {}", cfg.separation),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let regimes = regime_path(&mut rng, cfg.n_days);
    let direction = unit_direction(&mut rng, cfg.n_series);

    let mut values = DMatrix::zeros(cfg.n_days, cfg.n_series);
    for t in 0..cfg.n_days {
        for j in 0..cfg.n_series {
            let noise: f64 = rng.sample(StandardNormal);
            let shift = if regimes[t] == 2 {
                cfg.separation * direction[j]
            } else {
                0.0
            };
            values[(t, j)] = shift + noise;
        }
    }

    let dates = sequential_dates(cfg.start_date, cfg.n_days);
    let names: Vec<String> = (1..=cfg.n_series).map(|j| format!("s{j:02}")).collect();
    let panel = Panel::new(dates.clone(), names, values)?;

    let mut asset_values: [Vec<f64>; 4] = Default::default();
    for &regime in &regimes {
        let params = if regime == 2 { &CRISIS_PARAMS } else { &NORMAL_PARAMS };
        for (series, &(mu, sigma)) in asset_values.iter_mut().zip(params) {
            let z: f64 = rng.sample(StandardNormal);
            series.push(mu + sigma * z);
        }
    }
    let [sp500, crude, gold, bonds] = asset_values;
    let assets = AssetReturns::new(dates, sp500, crude, gold, bonds)?;

    Ok(SynthMarket {
        panel,
        assets,
        regimes,
    })
}

/// Generate `k` Gaussian clusters of `n_per` points in a `dims`-dimensional
/// score space. Cluster c is centred at `separation` along axis c with unit
/// noise; points round-robin over clusters. Returns the scores and the
/// 1-based cluster of each point.
pub fn generate_score_blobs(
    n_per: usize,
    k: usize,
    dims: usize,
    separation: f64,
    seed: u64,
) -> Result<(ScoreMatrix, Vec<usize>)> {
    if n_per < 2 || k == 0 {
        return Err(Error::InvalidConfig {
            detail: format!("need at least 2 points per cluster and 1 cluster, got {n_per} and {k}"),
        });
    }
    if dims < k {
        return Err(Error::InvalidConfig {
            detail: format!("blob centres need dims >= k, got dims {dims} and k {k}"),
        });
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::InvalidConfig {
            detail: format!("separation must be finite and non-negative, got {separation}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_per * k;
    let mut scores = DMatrix::zeros(n, dims);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let cluster = i % k;
        labels.push(cluster + 1);
        for j in 0..dims {
            let noise: f64 = rng.sample(StandardNormal);
            let centre = if j == cluster { separation } else { 0.0 };
            scores[(i, j)] = centre + noise;
        }
    }
    let dates = sequential_dates(NaiveDate::from_ymd_opt(2014, 1, 2).expect("valid date"), n);
    Ok((ScoreMatrix { dates, scores }, labels))
}
