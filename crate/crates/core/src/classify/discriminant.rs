//! Linear and quadratic discriminant analysis under Gaussian maximum
//! likelihood: pooled covariance for LDA, per-class for QDA, both divided
//! by n (not n-1). A ridge of `ridge_scale * trace / d` is added to every
//! covariance diagonal before inversion; fitting fails only if the matrix
//! stays singular after that.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cholesky first; LU as the fallback for matrices that are invertible but
/// not numerically positive definite.
pub(super) fn solve_spd(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    kind: &'static str,
) -> Result<DVector<f64>> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        return Ok(chol.solve(b));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::SingularCovariance { kind })
}

fn inverse_and_logdet(a: &DMatrix<f64>, kind: &'static str) -> Result<(DMatrix<f64>, f64)> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        let l = chol.l();
        let logdet = 2.0 * (0..a.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
        return Ok((chol.inverse(), logdet));
    }
    let lu = a.clone().lu();
    let det = lu.determinant();
    if !det.is_finite() || det <= 0.0 {
        return Err(Error::SingularCovariance { kind });
    }
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularCovariance { kind })?;
    Ok((inv, det.ln()))
}

pub(super) struct ClassSplit {
    pub neg: Vec<usize>,
    pub pos: Vec<usize>,
}

pub(super) fn split_classes(y: &[bool]) -> ClassSplit {
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for (i, &is_pos) in y.iter().enumerate() {
        if is_pos {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    ClassSplit { neg, pos }
}

pub(super) fn class_mean(x: &DMatrix<f64>, rows: &[usize]) -> DVector<f64> {
    let d = x.ncols();
    let mut mean = DVector::zeros(d);
    for &i in rows {
        for j in 0..d {
            mean[j] += x[(i, j)];
        }
    }
    mean / rows.len() as f64
}

/// Sum of outer products of row deviations from `mean` over `rows`
/// (unnormalized scatter).
fn scatter(x: &DMatrix<f64>, rows: &[usize], mean: &DVector<f64>) -> DMatrix<f64> {
    let d = x.ncols();
    let mut s = DMatrix::zeros(d, d);
    for &i in rows {
        for a in 0..d {
            let da = x[(i, a)] - mean[a];
            for b in 0..d {
                s[(a, b)] += da * (x[(i, b)] - mean[b]);
            }
        }
    }
    s
}

fn add_ridge(cov: &mut DMatrix<f64>, ridge_scale: f64) {
    let d = cov.nrows();
    let lambda = ridge_scale * cov.trace() / d as f64;
    for i in 0..d {
        cov[(i, i)] += lambda;
    }
}

/// score(x) = w . x + b, the log-posterior difference under a shared
/// covariance; positive means regime 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub weights: DVector<f64>,
    pub bias: f64,
}

pub(super) fn fit_lda(x: &DMatrix<f64>, y: &[bool], ridge_scale: f64) -> Result<LdaParams> {
    let split = split_classes(y);
    let n = y.len() as f64;
    let mu_neg = class_mean(x, &split.neg);
    let mu_pos = class_mean(x, &split.pos);
    let mut cov = (scatter(x, &split.neg, &mu_neg) + scatter(x, &split.pos, &mu_pos)) / n;
    add_ridge(&mut cov, ridge_scale);

    let diff = &mu_pos - &mu_neg;
    let weights = solve_spd(&cov, &diff, "LDA")?;
    let mid = (&mu_pos + &mu_neg) / 2.0;
    let prior_pos = split.pos.len() as f64 / n;
    let prior_neg = split.neg.len() as f64 / n;
    let bias = -weights.dot(&mid) + (prior_pos / prior_neg).ln();
    Ok(LdaParams { weights, bias })
}

pub(super) fn lda_scores(params: &LdaParams, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let mut s = params.bias;
            for j in 0..x.ncols() {
                s += params.weights[j] * x[(i, j)];
            }
            s
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaClass {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
    pub logdet: f64,
    pub log_prior: f64,
}

/// score(x) = log-posterior(pos) - log-posterior(neg) with per-class
/// Gaussians; positive means regime 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaParams {
    pub neg: QdaClass,
    pub pos: QdaClass,
}

fn fit_qda_class(
    x: &DMatrix<f64>,
    rows: &[usize],
    n_total: f64,
    ridge_scale: f64,
) -> Result<QdaClass> {
    let mean = class_mean(x, rows);
    let mut cov = scatter(x, rows, &mean) / rows.len() as f64;
    add_ridge(&mut cov, ridge_scale);
    let (precision, logdet) = inverse_and_logdet(&cov, "QDA")?;
    Ok(QdaClass {
        mean,
        precision,
        logdet,
        log_prior: (rows.len() as f64 / n_total).ln(),
    })
}

pub(super) fn fit_qda(x: &DMatrix<f64>, y: &[bool], ridge_scale: f64) -> Result<QdaParams> {
    let split = split_classes(y);
    let n = y.len() as f64;
    Ok(QdaParams {
        neg: fit_qda_class(x, &split.neg, n, ridge_scale)?,
        pos: fit_qda_class(x, &split.pos, n, ridge_scale)?,
    })
}

fn qda_log_density(class: &QdaClass, x: &DMatrix<f64>, i: usize) -> f64 {
    let d = x.ncols();
    let mut dev = DVector::zeros(d);
    for j in 0..d {
        dev[j] = x[(i, j)] - class.mean[j];
    }
    let maha = (&class.precision * &dev).dot(&dev);
    class.log_prior - 0.5 * (class.logdet + maha)
}

pub(super) fn qda_scores(params: &QdaParams, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| qda_log_density(&params.pos, x, i) - qda_log_density(&params.neg, x, i))
        .collect()
}
