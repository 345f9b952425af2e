//! Binary regime classifiers over component scores.
//!
//! Six model families share one interface: fit on a score matrix with regime
//! labels, score new rows (higher = more like the second class), and predict
//! by thresholding the score at the family's natural boundary. All fits are
//! fully deterministic; no family draws random numbers. The only seeded
//! operation is the optional shuffled cross-validation mode.
//!
//! The module is deliberately binary-only: with more than two distinct
//! labels, fitting errors instead of silently doing one-vs-rest.

mod adaboost;
mod discriminant;
mod logistic;
mod metrics;
mod naive_bayes;
mod tree;

pub use adaboost::{AdaBoostParams, Stump};
pub use discriminant::{LdaParams, QdaClass, QdaParams};
pub use logistic::LogisticParams;
pub use metrics::{metric_accuracy, metric_auc, metric_f1};
pub use naive_bayes::{NaiveBayesClass, NaiveBayesParams};
pub use tree::{Node, TreeParams};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pca::ScoreMatrix;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Lda,
    Qda,
    Logistic,
    Tree,
    #[serde(rename = "adaboost")]
    AdaBoost,
    NaiveBayes,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Lda,
        ClassifierKind::Qda,
        ClassifierKind::Logistic,
        ClassifierKind::Tree,
        ClassifierKind::AdaBoost,
        ClassifierKind::NaiveBayes,
    ];

    /// Stable machine-readable name, used in file names and config values.
    pub fn slug(self) -> &'static str {
        match self {
            ClassifierKind::Lda => "lda",
            ClassifierKind::Qda => "qda",
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Tree => "tree",
            ClassifierKind::AdaBoost => "adaboost",
            ClassifierKind::NaiveBayes => "naive_bayes",
        }
    }

    pub fn from_slug(slug: &str) -> Option<ClassifierKind> {
        ClassifierKind::ALL.iter().copied().find(|k| k.slug() == slug)
    }

    /// Score threshold whose crossing flips `predict`. Scores at the
    /// threshold go to the positive class.
    pub fn score_threshold(self) -> f64 {
        match self {
            // the tree scores with a leaf probability, not a margin
            ClassifierKind::Tree => 0.5,
            _ => 0.0,
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ClassifierKind::Lda => "LDA",
            ClassifierKind::Qda => "QDA",
            ClassifierKind::Logistic => "Logistic Regression",
            ClassifierKind::Tree => "Decision Tree",
            ClassifierKind::AdaBoost => "AdaBoost",
            ClassifierKind::NaiveBayes => "Naive Bayes",
        };
        f.write_str(name)
    }
}

/// Hyperparameters for all six families. Every field has the default used
/// throughout the pipeline; configs may override any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    /// Ridge added to covariance diagonals as `ridge_scale * trace / dim`.
    pub ridge_scale: f64,
    pub logistic_max_iter: usize,
    /// Convergence tolerance on the max-norm parameter change.
    pub logistic_tol: f64,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub adaboost_rounds: usize,
    /// Lower bound on per-feature variances in naive Bayes.
    pub nb_var_floor: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            ridge_scale: 1e-6,
            logistic_max_iter: 100,
            logistic_tol: 1e-8,
            tree_max_depth: 8,
            tree_min_leaf: 5,
            adaboost_rounds: 100,
            nb_var_floor: naive_bayes::DEFAULT_VAR_FLOOR,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |detail: String| Err(Error::InvalidConfig { detail });
        if !self.ridge_scale.is_finite() || self.ridge_scale < 0.0 {
            return bad(format!("ridge_scale must be finite and >= 0, got {}", self.ridge_scale));
        }
        if self.logistic_max_iter == 0 {
            return bad("logistic_max_iter must be at least 1".to_string());
        }
        if !self.logistic_tol.is_finite() || self.logistic_tol <= 0.0 {
            return bad(format!("logistic_tol must be finite and > 0, got {}", self.logistic_tol));
        }
        if self.tree_max_depth == 0 {
            return bad("tree_max_depth must be at least 1".to_string());
        }
        if self.tree_min_leaf == 0 {
            return bad("tree_min_leaf must be at least 1".to_string());
        }
        if self.adaboost_rounds == 0 {
            return bad("adaboost_rounds must be at least 1".to_string());
        }
        if !self.nb_var_floor.is_finite() || self.nb_var_floor <= 0.0 {
            return bad(format!("nb_var_floor must be finite and > 0, got {}", self.nb_var_floor));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Params {
    Lda(LdaParams),
    Qda(QdaParams),
    Logistic(LogisticParams),
    Tree(TreeParams),
    #[serde(rename = "adaboost")]
    AdaBoost(AdaBoostParams),
    NaiveBayes(NaiveBayesParams),
}

/// A fitted binary classifier. `classes` holds the two regime ids in
/// ascending order; scores are monotone in the probability of `classes[1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassifier {
    kind: ClassifierKind,
    classes: [usize; 2],
    n_features: usize,
    params: Params,
}

impl RegimeClassifier {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    /// The two regime ids seen at fit time, ascending. The second one is the
    /// positive class.
    pub fn classes(&self) -> [usize; 2] {
        self.classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Real-valued scores, one per row, monotone in the probability of the
    /// positive class.
    pub fn predict_score(&self, scores: &ScoreMatrix) -> Result<Vec<f64>> {
        let x = &scores.scores;
        if x.ncols() != self.n_features {
            return Err(Error::ColumnMismatch {
                detail: format!(
                    "classifier was fit on {} feature(s), got {}",
                    self.n_features,
                    x.ncols()
                ),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput {
                what: "score matrix",
            });
        }
        Ok(match &self.params {
            Params::Lda(p) => discriminant::lda_scores(p, x),
            Params::Qda(p) => discriminant::qda_scores(p, x),
            Params::Logistic(p) => logistic::logistic_scores(p, x),
            Params::Tree(p) => tree::tree_scores(p, x),
            Params::AdaBoost(p) => adaboost::adaboost_scores(p, x),
            Params::NaiveBayes(p) => naive_bayes::naive_bayes_scores(p, x),
        })
    }

    /// Regime ids, one per row: the score thresholded at the kind's natural
    /// boundary. Only labels seen at fit time are returned.
    pub fn predict(&self, scores: &ScoreMatrix) -> Result<Vec<usize>> {
        let threshold = self.kind.score_threshold();
        Ok(self
            .predict_score(scores)?
            .into_iter()
            .map(|s| {
                if s >= threshold {
                    self.classes[1]
                } else {
                    self.classes[0]
                }
            })
            .collect())
    }
}

/// Validate a (scores, labels) pair for fitting and return the ascending
/// class pair plus the boolean "is positive class" encoding.
fn check_training_data(scores: &ScoreMatrix, labels: &[usize]) -> Result<([usize; 2], Vec<bool>)> {
    let x = &scores.scores;
    if x.nrows() == 0 {
        return Err(Error::EmptyInput {
            what: "score matrix",
        });
    }
    if labels.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            what: "labels vs score rows",
            left: labels.len(),
            right: x.nrows(),
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput {
            what: "score matrix",
        });
    }
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::NotBinary {
            found: distinct.len(),
        });
    }
    let classes = [distinct[0], distinct[1]];
    for &class in &classes {
        let count = labels.iter().filter(|&&l| l == class).count();
        if count < 2 {
            return Err(Error::ClassTooSmall {
                label: class,
                count,
                min: 2,
            });
        }
    }
    let y: Vec<bool> = labels.iter().map(|&l| l == classes[1]).collect();
    Ok((classes, y))
}

/// Fit one classifier family. Deterministic: the same inputs always produce
/// the same model.
pub fn fit(
    kind: ClassifierKind,
    scores: &ScoreMatrix,
    labels: &[usize],
    hyper: &HyperParams,
) -> Result<RegimeClassifier> {
    hyper.validate()?;
    let (classes, y) = check_training_data(scores, labels)?;
    let x = &scores.scores;
    let params = match kind {
        ClassifierKind::Lda => Params::Lda(discriminant::fit_lda(x, &y, hyper.ridge_scale)?),
        ClassifierKind::Qda => Params::Qda(discriminant::fit_qda(x, &y, hyper.ridge_scale)?),
        ClassifierKind::Logistic => Params::Logistic(logistic::fit_logistic(
            x,
            &y,
            hyper.logistic_max_iter,
            hyper.logistic_tol,
        )?),
        ClassifierKind::Tree => {
            Params::Tree(tree::fit_tree(x, &y, hyper.tree_max_depth, hyper.tree_min_leaf)?)
        }
        ClassifierKind::AdaBoost => {
            Params::AdaBoost(adaboost::fit_adaboost(x, &y, hyper.adaboost_rounds)?)
        }
        ClassifierKind::NaiveBayes => {
            Params::NaiveBayes(naive_bayes::fit_naive_bayes(x, &y, hyper.nb_var_floor)?)
        }
    };
    Ok(RegimeClassifier {
        kind,
        classes,
        n_features: x.ncols(),
        params,
    })
}

/// How cross-validation assigns rows to folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMode {
    /// Contiguous time blocks in row order; the seed is unused. The default:
    /// block folds do not leak autocorrelated neighbors across the
    /// train/validate boundary.
    Block,
    /// Seeded row shuffle before forming blocks.
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub auc: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// Cross-validated performance of one classifier family. The headline
/// numbers are unweighted means over folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub kind: ClassifierKind,
    pub auc: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub per_fold: Vec<FoldMetrics>,
}

fn take_rows(scores: &ScoreMatrix, rows: &[usize]) -> ScoreMatrix {
    let d = scores.scores.ncols();
    let mut sub = DMatrix::zeros(rows.len(), d);
    let mut dates = Vec::with_capacity(rows.len());
    for (out, &i) in rows.iter().enumerate() {
        dates.push(scores.dates[i]);
        for j in 0..d {
            sub[(out, j)] = scores.scores[(i, j)];
        }
    }
    ScoreMatrix { dates, scores: sub }
}

fn check_fold_side(
    labels: &[usize],
    rows: &[usize],
    classes: [usize; 2],
    fold: usize,
    side: &'static str,
) -> Result<()> {
    for &class in &classes {
        if !rows.iter().any(|&i| labels[i] == class) {
            return Err(Error::FoldMissingClass { fold, side, class });
        }
    }
    Ok(())
}

/// K-fold cross-validation of one family: fit on all folds but one, score
/// the held-out fold, report AUC/accuracy/F1 per fold and their means.
///
/// Folds are contiguous blocks of rows (earlier blocks get the remainder
/// row). `CvMode::Shuffled` permutes rows first with the given seed.
pub fn cross_validate(
    kind: ClassifierKind,
    scores: &ScoreMatrix,
    labels: &[usize],
    hyper: &HyperParams,
    folds: usize,
    mode: CvMode,
    seed: u64,
) -> Result<CvReport> {
    hyper.validate()?;
    let (classes, _) = check_training_data(scores, labels)?;
    let n = scores.scores.nrows();
    if folds < 2 || folds > n {
        return Err(Error::InvalidFolds { folds, rows: n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    if mode == CvMode::Shuffled {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let base = n / folds;
    let extra = n % folds;
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        blocks.push(order[start..start + len].to_vec());
        start += len;
    }

    // Folds are independent; evaluate in parallel, then surface errors in
    // fold order so the reported failure does not depend on scheduling.
    let results: Vec<Result<FoldMetrics>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let validate = &blocks[f];
            let train: Vec<usize> = (0..folds)
                .filter(|&g| g != f)
                .flat_map(|g| blocks[g].iter().copied())
                .collect();
            check_fold_side(labels, &train, classes, f + 1, "train")?;
            check_fold_side(labels, validate, classes, f + 1, "validation")?;

            let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
            let truth: Vec<usize> = validate.iter().map(|&i| labels[i]).collect();
            let model = fit(kind, &take_rows(scores, &train), &train_labels, hyper)?;
            let held_out = take_rows(scores, validate);
            let score = model.predict_score(&held_out)?;
            let pred = model.predict(&held_out)?;
            Ok(FoldMetrics {
                auc: metric_auc(&score, &truth)?,
                accuracy: metric_accuracy(&pred, &truth)?,
                f1: metric_f1(&pred, &truth)?,
            })
        })
        .collect();

    let mut per_fold = Vec::with_capacity(folds);
    for result in results {
        per_fold.push(result?);
    }
    let mean = |get: fn(&FoldMetrics) -> f64| {
        per_fold.iter().map(get).sum::<f64>() / per_fold.len() as f64
    };
    Ok(CvReport {
        kind,
        auc: mean(|m| m.auc),
        accuracy: mean(|m| m.accuracy),
        f1: mean(|m| m.f1),
        per_fold,
    })
}
