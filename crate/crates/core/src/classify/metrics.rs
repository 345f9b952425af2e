//! Binary classification metrics. The positive class is the larger regime
//! id present in the truth labels (regime 2, the crisis regime, in the
//! two-regime pipeline).

use std::collections::BTreeSet;

use crate::error::{Error, Result};

fn binary_classes(truth: &[usize], metric: &'static str) -> Result<(usize, usize)> {
    let distinct: BTreeSet<usize> = truth.iter().cloned().collect();
    match distinct.len() {
        0 => Err(Error::EmptyInput { what: "truth labels" }),
        1 => Err(Error::OneClassMetric { metric }),
        2 => {
            let mut it = distinct.into_iter();
            Ok((it.next().unwrap(), it.next().unwrap()))
        }
        n => Err(Error::NotBinary { found: n }),
    }
}

/// Mann-Whitney AUC over real-valued scores, with 0.5 credit for ties
/// (implemented via average ranks).
pub fn metric_auc(scores: &[f64], truth: &[usize]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "scores vs truth",
            left: scores.len(),
            right: truth.len(),
        });
    }
    let (_, positive) = binary_classes(truth, "AUC")?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFiniteInput { what: "scores" });
    }
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Average rank within each tie group; ranks are 1-based.
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }

    let n_pos = truth.iter().filter(|&&t| t == positive).count();
    let n_neg = n - n_pos;
    let rank_sum: f64 = (0..n)
        .filter(|&i| truth[i] == positive)
        .map(|i| ranks[i])
        .sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Fraction of predictions equal to the truth.
pub fn metric_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs truth",
            left: pred.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput { what: "truth labels" });
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// F1 for the positive class, with the 0/0 -> 0 convention for precision,
/// recall, and the harmonic mean itself.
pub fn metric_f1(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs truth",
            left: pred.len(),
            right: truth.len(),
        });
    }
    let (_, positive) = binary_classes(truth, "F1")?;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fne = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == positive, t == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fne += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fne == 0 {
        0.0
    } else {
        tp as f64 / (tp + fne) as f64
    };
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}
