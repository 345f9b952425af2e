//! Discrete AdaBoost over depth-1 decision stumps.
//!
//! A stump votes `polarity` when `x[feature] <= threshold` and `-polarity`
//! otherwise; thresholds are midpoints between consecutive distinct sorted
//! feature values. The stump search scans features in index order and
//! thresholds ascending, trying polarity +1 before -1, and keeps the first
//! strictly smallest weighted error: fully deterministic with no seed.
//!
//! A round that cannot find error < 0.5 stops boosting without selecting;
//! a perfect stump is selected and then stops it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Error floor used only inside the vote weight so a perfect stump gets a
/// large finite alpha instead of an infinite one.
const ERROR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// +1 or -1; the vote for the `x <= threshold` side.
    pub polarity: i8,
    pub alpha: f64,
    /// The raw weighted error this stump was selected at (invariant: < 0.5).
    pub weighted_error: f64,
}

impl Stump {
    fn vote(&self, x: &DMatrix<f64>, i: usize) -> f64 {
        let side = if x[(i, self.feature)] <= self.threshold {
            1.0
        } else {
            -1.0
        };
        side * self.polarity as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub rounds: Vec<Stump>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    polarity: i8,
    error: f64,
}

fn best_stump(x: &DMatrix<f64>, y: &[bool], w: &[f64]) -> Option<Candidate> {
    let n = x.nrows();
    let total_pos: f64 = (0..n).filter(|&i| y[i]).map(|i| w[i]).sum();
    let mut best: Option<Candidate> = None;
    for feature in 0..x.ncols() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            x[(a, feature)]
                .partial_cmp(&x[(b, feature)])
                .expect("finite features")
        });
        let mut left_pos = 0.0;
        let mut left_neg = 0.0;
        for pos in 0..n - 1 {
            let i = order[pos];
            if y[i] {
                left_pos += w[i];
            } else {
                left_neg += w[i];
            }
            let here = x[(i, feature)];
            let next = x[(order[pos + 1], feature)];
            if here == next {
                continue;
            }
            let threshold = here + (next - here) / 2.0;
            // polarity +1 votes positive on the left side
            let err_plus = left_neg + (total_pos - left_pos);
            for (polarity, error) in [(1i8, err_plus), (-1i8, 1.0 - err_plus)] {
                let better = match &best {
                    None => true,
                    Some(b) => error < b.error,
                };
                if better {
                    best = Some(Candidate {
                        feature,
                        threshold,
                        polarity,
                        error,
                    });
                }
            }
        }
    }
    best
}

pub(super) fn fit_adaboost(x: &DMatrix<f64>, y: &[bool], rounds: usize) -> Result<AdaBoostParams> {
    let n = x.nrows();
    let mut w = vec![1.0 / n as f64; n];
    let mut selected = Vec::new();
    for _ in 0..rounds {
        let Some(cand) = best_stump(x, y, &w) else {
            break;
        };
        if cand.error >= 0.5 - 1e-12 {
            break;
        }
        let eps = cand.error.max(ERROR_FLOOR);
        let alpha = 0.5 * ((1.0 - eps) / eps).ln();
        let stump = Stump {
            feature: cand.feature,
            threshold: cand.threshold,
            polarity: cand.polarity,
            alpha,
            weighted_error: cand.error,
        };
        let perfect = cand.error <= ERROR_FLOOR;
        for i in 0..n {
            let margin = if y[i] { 1.0 } else { -1.0 } * stump.vote(x, i);
            w[i] *= (-alpha * margin).exp();
        }
        let total: f64 = w.iter().sum();
        for wi in w.iter_mut() {
            *wi /= total;
        }
        selected.push(stump);
        if perfect {
            break;
        }
    }
    Ok(AdaBoostParams { rounds: selected })
}

pub(super) fn adaboost_scores(params: &AdaBoostParams, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            params
                .rounds
                .iter()
                .map(|stump| stump.alpha * stump.vote(x, i))
                .sum()
        })
        .collect()
}
