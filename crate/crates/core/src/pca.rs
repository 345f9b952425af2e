//! Principal component analysis by singular value decomposition.
//!
//! Fit on a standardized training panel; eigenvalue_j = sigma_j^2 / (T-1),
//! loadings are the right-singular vectors. Components are ordered by
//! descending eigenvalue and sign-fixed so each column's largest-magnitude
//! entry is positive, which makes outputs reproducible across platforms.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Panel, Standardizer};

/// Clamp threshold: eigenvalues below this are reported as exactly 0.
const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Residual-norm cutoff when completing the loading basis for T < S fits.
const BASIS_RESIDUAL_MIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// S x S orthonormal; column j is principal direction j.
    loadings: DMatrix<f64>,
    /// Nonincreasing, length S, clamped to [0, inf).
    eigenvalues: Vec<f64>,
    /// The column statistics the fit panel was standardized with.
    standardizer: Standardizer,
    n_selected: usize,
}

impl PcaModel {
    #[cfg(test)]
    pub(crate) fn from_parts(
        loadings: DMatrix<f64>,
        eigenvalues: Vec<f64>,
        standardizer: Standardizer,
        n_selected: usize,
    ) -> Self {
        PcaModel {
            loadings,
            eigenvalues,
            standardizer,
            n_selected,
        }
    }

    pub fn loadings(&self) -> &DMatrix<f64> {
        &self.loadings
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn n_selected(&self) -> usize {
        self.n_selected
    }

    /// Number of input columns S.
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn set_n_selected(&mut self, d: usize) -> Result<()> {
        if d < 1 || d > self.dim() {
            return Err(Error::DimensionOutOfRange {
                dim: d,
                max: self.dim(),
            });
        }
        self.n_selected = d;
        Ok(())
    }
}

/// Projection of a panel onto the leading principal directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub dates: Vec<NaiveDate>,
    /// T x d, column j = projection onto direction j.
    pub scores: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainedVarianceRow {
    /// 1-based component index.
    pub dimension: usize,
    pub eigenvalue: f64,
    pub pct_of_variance: f64,
    pub cumulative_pct: f64,
}

/// Fit PCA on a standardized panel. `standardizer` is the fit that produced
/// `standardized`; it travels with the model so test panels can be projected
/// with training statistics.
pub fn fit_pca(standardized: &Panel, standardizer: &Standardizer) -> Result<PcaModel> {
    let (t, s) = (standardized.rows(), standardized.cols());
    if t < 2 {
        return Err(Error::TooFewRows { rows: t, min: 2 });
    }
    if standardized.names() != standardizer.names() {
        return Err(Error::ColumnMismatch {
            detail: "panel columns differ from the standardizer's fit columns".to_string(),
        });
    }
    let x = standardized.values();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SvdFailed {
            detail: "input contains non-finite values".to_string(),
        });
    }

    // svd_unordered iterates to convergence with the eps the implicit-shift
    // algorithm is tuned for; a tighter eps mis-deflates degenerate inputs.
    // The finiteness check above rules out the one non-converging case, and
    // ordering is applied below with an explicit tie rule.
    let svd = x.clone().svd_unordered(true, true);
    let v_t = svd.v_t.expect("v_t requested");
    let rank_dim = svd.singular_values.len();

    let denom = (t - 1) as f64;
    let mut eigenvalues = vec![0.0; s];
    for (j, sigma) in svd.singular_values.iter().enumerate() {
        let lambda = sigma * sigma / denom;
        eigenvalues[j] = if lambda < EIGENVALUE_FLOOR { 0.0 } else { lambda };
    }

    let mut columns: Vec<DVector<f64>> = (0..rank_dim)
        .map(|j| v_t.row(j).transpose().clone_owned())
        .collect();
    complete_basis(&mut columns, s)?;

    // Stable sort: descending eigenvalue, ties keep the SVD's column order.
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&j| eigenvalues[j]).collect();
    let mut columns: Vec<DVector<f64>> = order.iter().map(|&j| columns[j].clone()).collect();

    for col in &mut columns {
        apply_sign_convention(col);
    }
    let loadings = DMatrix::from_columns(&columns);

    Ok(PcaModel {
        loadings,
        eigenvalues,
        standardizer: standardizer.clone(),
        n_selected: s,
    })
}

/// Extend an orthonormal column set to a full S-dimensional basis by
/// Gram-Schmidt over the canonical basis vectors.
fn complete_basis(columns: &mut Vec<DVector<f64>>, s: usize) -> Result<()> {
    for i in 0..s {
        if columns.len() == s {
            break;
        }
        let mut v = DVector::zeros(s);
        v[i] = 1.0;
        // Two projection passes keep the completed columns orthonormal well
        // inside the 1e-8 contract.
        for _ in 0..2 {
            for c in columns.iter() {
                let proj = c.dot(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > BASIS_RESIDUAL_MIN {
            columns.push(v / norm);
        }
    }
    if columns.len() != s {
        return Err(Error::SvdFailed {
            detail: "could not complete the loading basis".to_string(),
        });
    }
    Ok(())
}

/// Flip the column if its largest-magnitude entry is negative. Ties on
/// magnitude resolve to the lowest row index.
fn apply_sign_convention(col: &mut DVector<f64>) {
    let mut best = 0usize;
    for i in 1..col.len() {
        if col[i].abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.neg_mut();
    }
}

/// Smallest d whose cumulative variance share reaches `threshold`. Falls
/// back to S when the total variance is zero.
pub fn select_components(model: &PcaModel, threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig {
            detail: format!("variance threshold must be in (0, 1], got {threshold}"),
        });
    }
    let total: f64 = model.eigenvalues.iter().sum();
    if total <= 0.0 {
        return Ok(model.dim());
    }
    let mut cum = 0.0;
    for (j, lambda) in model.eigenvalues.iter().enumerate() {
        cum += lambda;
        if cum / total >= threshold {
            return Ok(j + 1);
        }
    }
    Ok(model.dim())
}

/// Project a standardized panel onto the first d principal directions.
pub fn transform(model: &PcaModel, standardized: &Panel, d: usize) -> Result<ScoreMatrix> {
    if d < 1 || d > model.dim() {
        return Err(Error::DimensionOutOfRange {
            dim: d,
            max: model.dim(),
        });
    }
    if standardized.names() != model.standardizer.names() {
        return Err(Error::ColumnMismatch {
            detail: "panel columns differ from the model's fit columns".to_string(),
        });
    }
    let scores = standardized.values() * model.loadings.columns(0, d);
    Ok(ScoreMatrix {
        dates: standardized.dates().to_vec(),
        scores,
    })
}

pub fn explained_variance_table(model: &PcaModel) -> Vec<ExplainedVarianceRow> {
    let total: f64 = model.eigenvalues.iter().sum();
    let mut rows = Vec::with_capacity(model.dim());
    let mut cum = 0.0;
    for (j, &lambda) in model.eigenvalues.iter().enumerate() {
        cum += lambda;
        let (pct, cum_pct) = if total > 0.0 {
            (100.0 * lambda / total, 100.0 * cum / total)
        } else {
            (0.0, 0.0)
        };
        rows.push(ExplainedVarianceRow {
            dimension: j + 1,
            eigenvalue: lambda,
            pct_of_variance: pct,
            cumulative_pct: cum_pct,
        });
    }
    rows
}

/// The n columns contributing most to the given direction (1-based), as
/// (name, squared loading). Squared loadings over all S columns sum to 1.
pub fn top_loadings(
    model: &PcaModel,
    dimension: usize,
    n: usize,
) -> Result<Vec<(String, f64)>> {
    if dimension < 1 || dimension > model.dim() {
        return Err(Error::DimensionOutOfRange {
            dim: dimension,
            max: model.dim(),
        });
    }
    let col = model.loadings.column(dimension - 1);
    let mut contributions: Vec<(usize, f64)> = col
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v * v))
        .collect();
    contributions.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("squared loadings are finite"));
    Ok(contributions
        .into_iter()
        .take(n)
        .map(|(i, c)| (model.standardizer.names()[i].clone(), c))
        .collect())
}
