//! Logistic regression by iteratively reweighted least squares, no penalty.
//!
//! Each Newton step is halved until the deviance does not increase, so the
//! iteration is monotone. Convergence is declared on any of: max-norm of
//! the accepted step below `tol`; deviance saturated near zero; deviance
//! plateau. The last two matter on (quasi-)separable data, where the ML
//! coefficients diverge and the step criterion alone would never fire even
//! though the fitted probabilities stopped moving.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::discriminant::solve_spd;

const PROB_CLIP: f64 = 1e-12;
const WEIGHT_FLOOR: f64 = 1e-10;
/// Below this the model is saturated: every point sits at its own label.
const DEVIANCE_SATURATED: f64 = 1e-6;
/// Relative deviance-change cutoff, |change| / (0.1 + |dev|), as in GLM
/// practice. On separable data the deviance creeps toward zero forever;
/// this is what ends the creep.
const DEVIANCE_PLATEAU: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;

/// score(x) = beta[0] + beta[1..] . x, the linear predictor; positive means
/// regime 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub beta: DVector<f64>,
    pub iterations: usize,
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

fn deviance_of(xa: &DMatrix<f64>, yv: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = xa * beta;
    let mut deviance = 0.0;
    for (i, &yi) in yv.iter().enumerate() {
        let p = sigmoid(eta[i]).clamp(PROB_CLIP, 1.0 - PROB_CLIP);
        deviance -= 2.0 * (yi * p.ln() + (1.0 - yi) * (1.0 - p).ln());
    }
    deviance
}

pub(super) fn fit_logistic(
    x: &DMatrix<f64>,
    y: &[bool],
    max_iter: usize,
    tol: f64,
) -> Result<LogisticParams> {
    let n = x.nrows();
    let d = x.ncols() + 1;
    let mut xa = DMatrix::zeros(n, d);
    for i in 0..n {
        xa[(i, 0)] = 1.0;
        for j in 0..x.ncols() {
            xa[(i, j + 1)] = x[(i, j)];
        }
    }
    let yv: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();

    let mut beta: DVector<f64> = DVector::zeros(d);
    let mut deviance = deviance_of(&xa, &yv, &beta);
    for iter in 1..=max_iter {
        let eta = &xa * &beta;
        let mut w = DVector::zeros(n);
        let mut z = DVector::zeros(n);
        for i in 0..n {
            let p = sigmoid(eta[i]).clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            let wi = (p * (1.0 - p)).max(WEIGHT_FLOOR);
            w[i] = wi;
            z[i] = eta[i] + (yv[i] - p) / wi;
        }

        // weighted normal equations: (X' W X) beta_new = X' W z
        let mut xtwx = DMatrix::zeros(d, d);
        let mut xtwz = DVector::zeros(d);
        for i in 0..n {
            for a in 0..d {
                let xw = xa[(i, a)] * w[i];
                xtwz[a] += xw * z[i];
                for b in a..d {
                    xtwx[(a, b)] += xw * xa[(i, b)];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                xtwx[(a, b)] = xtwx[(b, a)];
            }
        }
        let mut candidate = solve_spd(&xtwx, &xtwz, "logistic regression")?;

        // Newton can overshoot near separability; halve back until the
        // deviance stops increasing so the iteration is monotone.
        let mut new_deviance = deviance_of(&xa, &yv, &candidate);
        let mut halvings = 0;
        while (!new_deviance.is_finite() || new_deviance > deviance + 1e-12)
            && halvings < MAX_HALVINGS
        {
            candidate = (&candidate + &beta) * 0.5;
            new_deviance = deviance_of(&xa, &yv, &candidate);
            halvings += 1;
        }

        let step = (&candidate - &beta).amax();
        let plateau =
            (deviance - new_deviance).abs() <= DEVIANCE_PLATEAU * (0.1 + new_deviance.abs());
        beta = candidate;
        deviance = new_deviance;
        if step < tol || deviance <= DEVIANCE_SATURATED || plateau {
            return Ok(LogisticParams {
                beta,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "logistic regression (IRLS)",
        iterations: max_iter,
    })
}

pub(super) fn logistic_scores(params: &LogisticParams, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let mut eta = params.beta[0];
            for j in 0..x.ncols() {
                eta += params.beta[j + 1] * x[(i, j)];
            }
            eta
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recovers_known_coefficients_on_simulated_data() {
        // y ~ Bernoulli(sigmoid(1.5 x1 - 2 x2 + 0.5)), large n
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 4000;
        let mut x = DMatrix::zeros(n, 2);
        let mut y = vec![false; n];
        for i in 0..n {
            let x1 = rng.random_range(-2.0..2.0);
            let x2 = rng.random_range(-2.0..2.0);
            x[(i, 0)] = x1;
            x[(i, 1)] = x2;
            let p = sigmoid(0.5 + 1.5 * x1 - 2.0 * x2);
            y[i] = rng.random_range(0.0..1.0) < p;
        }
        let params = fit_logistic(&x, &y, 100, 1e-8).unwrap();
        assert_abs_diff_eq!(params.beta[0], 0.5, epsilon = 0.2);
        assert_abs_diff_eq!(params.beta[1], 1.5, epsilon = 0.2);
        assert_abs_diff_eq!(params.beta[2], -2.0, epsilon = 0.2);
    }

    #[test]
    fn separable_data_converges_and_separates() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n_per = 50;
        let mut x = DMatrix::zeros(2 * n_per, 1);
        let mut y = vec![false; 2 * n_per];
        for i in 0..n_per {
            x[(i, 0)] = rng.random_range(-2.0..-1.0);
            x[(n_per + i, 0)] = rng.random_range(1.0..2.0);
            y[n_per + i] = true;
        }
        let params = fit_logistic(&x, &y, 100, 1e-8).unwrap();
        let scores = logistic_scores(&params, &x);
        for (i, s) in scores.iter().enumerate() {
            assert_eq!(*s > 0.0, y[i]);
        }
    }

    #[test]
    fn balanced_coin_fits_prior_only() {
        let x = DMatrix::from_fn(8, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let y = vec![true, true, false, false, true, true, false, false];
        let params = fit_logistic(&x, &y, 100, 1e-8).unwrap();
        // labels are independent of x; both coefficients stay near zero
        assert_abs_diff_eq!(params.beta[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(params.beta[1], 0.0, epsilon = 1e-6);
    }
}
