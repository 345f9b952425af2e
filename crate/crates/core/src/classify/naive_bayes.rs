//! Gaussian naive Bayes with per-feature maximum-likelihood moments.
//!
//! Each class models every feature as an independent Gaussian; variances use
//! the ML (divide by n) estimator and are floored so a constant feature
//! cannot produce an infinite density. The score is the log-posterior
//! difference, positive minus negative, including the log prior ratio.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Lower bound applied to every per-feature variance.
pub(super) const DEFAULT_VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesClass {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub log_prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub neg: NaiveBayesClass,
    pub pos: NaiveBayesClass,
}

fn fit_class(x: &DMatrix<f64>, rows: &[usize], log_prior: f64, var_floor: f64) -> NaiveBayesClass {
    let d = x.ncols();
    let n = rows.len() as f64;
    let mut means = vec![0.0; d];
    let mut variances = vec![0.0; d];
    for j in 0..d {
        let mean = rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / n;
        let var = rows.iter().map(|&i| (x[(i, j)] - mean).powi(2)).sum::<f64>() / n;
        means[j] = mean;
        variances[j] = var.max(var_floor);
    }
    NaiveBayesClass {
        means,
        variances,
        log_prior,
    }
}

pub(super) fn fit_naive_bayes(
    x: &DMatrix<f64>,
    y: &[bool],
    var_floor: f64,
) -> Result<NaiveBayesParams> {
    let n = x.nrows();
    let pos_rows: Vec<usize> = (0..n).filter(|&i| y[i]).collect();
    let neg_rows: Vec<usize> = (0..n).filter(|&i| !y[i]).collect();
    let pos_prior = (pos_rows.len() as f64 / n as f64).ln();
    let neg_prior = (neg_rows.len() as f64 / n as f64).ln();
    Ok(NaiveBayesParams {
        neg: fit_class(x, &neg_rows, neg_prior, var_floor),
        pos: fit_class(x, &pos_rows, pos_prior, var_floor),
    })
}

fn log_likelihood(class: &NaiveBayesClass, x: &DMatrix<f64>, i: usize) -> f64 {
    class
        .means
        .iter()
        .zip(&class.variances)
        .enumerate()
        .map(|(j, (mean, var))| {
            let diff = x[(i, j)] - mean;
            -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + diff * diff / var)
        })
        .sum()
}

pub(super) fn naive_bayes_scores(params: &NaiveBayesParams, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let pos = params.pos.log_prior + log_likelihood(&params.pos, x, i);
            let neg = params.neg.log_prior + log_likelihood(&params.neg, x, i);
            pos - neg
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn density(x: f64, mean: f64, var: f64) -> f64 {
        (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    }

    #[test]
    fn score_matches_direct_posterior_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let n = 40;
        let mut x = DMatrix::zeros(n, 3);
        let mut y = vec![false; n];
        for i in 0..n {
            y[i] = i % 3 == 0;
            let shift = if y[i] { 1.0 } else { -0.5 };
            for j in 0..3 {
                x[(i, j)] = shift + rng.random_range(-1.0..1.0);
            }
        }
        let params = fit_naive_bayes(&x, &y, DEFAULT_VAR_FLOOR).unwrap();
        let scores = naive_bayes_scores(&params, &x);

        let n_pos = y.iter().filter(|&&t| t).count() as f64;
        let pi_pos = n_pos / n as f64;
        for i in 0..n {
            let mut lik_pos = pi_pos;
            let mut lik_neg = 1.0 - pi_pos;
            for j in 0..3 {
                lik_pos *= density(x[(i, j)], params.pos.means[j], params.pos.variances[j]);
                lik_neg *= density(x[(i, j)], params.neg.means[j], params.neg.variances[j]);
            }
            let posterior = lik_pos / (lik_pos + lik_neg);
            let from_score = 1.0 / (1.0 + (-scores[i]).exp());
            assert_relative_eq!(posterior, from_score, max_relative = 1e-10);
        }
    }

    #[test]
    fn moments_are_maximum_likelihood() {
        let x = DMatrix::from_row_slice(5, 1, &[1.0, 2.0, 3.0, 10.0, 14.0]);
        let y = vec![false, false, false, true, true];
        let params = fit_naive_bayes(&x, &y, DEFAULT_VAR_FLOOR).unwrap();
        assert_relative_eq!(params.neg.means[0], 2.0);
        // ML variance divides by n, not n - 1
        assert_relative_eq!(params.neg.variances[0], 2.0 / 3.0);
        assert_relative_eq!(params.pos.means[0], 12.0);
        assert_relative_eq!(params.pos.variances[0], 4.0);
        assert_relative_eq!(params.pos.log_prior, (2.0f64 / 5.0).ln());
    }

    #[test]
    fn constant_feature_stays_finite() {
        let mut x = DMatrix::zeros(8, 2);
        for i in 0..8 {
            x[(i, 0)] = 5.0;
            x[(i, 1)] = if i < 4 { -1.0 } else { 1.0 };
        }
        let y: Vec<bool> = (0..8).map(|i| i >= 4).collect();
        let params = fit_naive_bayes(&x, &y, DEFAULT_VAR_FLOOR).unwrap();
        assert_eq!(params.pos.variances[0], DEFAULT_VAR_FLOOR);
        let scores = naive_bayes_scores(&params, &x);
        assert!(scores.iter().all(|s| s.is_finite()));
        for (i, s) in scores.iter().enumerate() {
            assert_eq!(*s > 0.0, y[i]);
        }
    }
}
