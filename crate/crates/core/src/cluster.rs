//! k-means over principal-component scores with silhouette-based selection
//! of the cluster count.
//!
//! Lloyd's iterations, restarted `n_init` times from uniformly sampled
//! points; the best run wins by (inertia, restart index). Each restart
//! derives its own generator from (seed, restart), so the result does not
//! depend on how restarts are scheduled across threads.
//!
//! Cluster ids are canonicalized after fitting: regime 1 is the most
//! populous training cluster, then descending by size, ties broken by
//! lexicographic centroid order. The id space is therefore stable across
//! runs even though k-means itself has no preferred labeling.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pca::ScoreMatrix;

pub const DEFAULT_MAX_ITER: usize = 300;

/// Inertia may grow by at most this relative slack between Lloyd's
/// iterations before the monotonicity invariant is considered violated.
const INERTIA_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    /// k x d; row r is the centroid of regime r+1.
    pub centroids: DMatrix<f64>,
    /// Canonical regime ids in {1..k}, one per training row.
    pub train_labels: Vec<usize>,
    /// Total within-cluster squared euclidean distance.
    pub inertia: f64,
    /// Average silhouette width per candidate k (filled by [`select_k`]).
    pub silhouette_by_k: BTreeMap<usize, f64>,
}

/// One Lloyd's run before canonicalization.
struct RawFit {
    centroids: DMatrix<f64>,
    labels: Vec<usize>,
    inertia: f64,
}

fn squared_distance(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..points.ncols() {
        let d = points[(i, j)] - centroids[(c, j)];
        acc += d * d;
    }
    acc
}

/// Index of the nearest centroid; ties go to the lower index.
fn nearest(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>) -> usize {
    let mut best = 0;
    let mut best_d = squared_distance(points, i, centroids, 0);
    for c in 1..centroids.nrows() {
        let d = squared_distance(points, i, centroids, c);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn assign_all(points: &DMatrix<f64>, centroids: &DMatrix<f64>) -> Vec<usize> {
    (0..points.nrows())
        .map(|i| nearest(points, i, centroids))
        .collect()
}

fn inertia_of(points: &DMatrix<f64>, centroids: &DMatrix<f64>, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| squared_distance(points, i, centroids, c))
        .sum()
}

/// splitmix64-style mix of the user seed with a restart index, so restarts
/// draw from well-separated streams.
fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean update with empty-cluster repair: an empty cluster is re-seeded at
/// the point currently farthest from its assigned centroid (each repaired
/// point is consumed so two empty clusters cannot land on the same point).
fn update_centroids(
    points: &DMatrix<f64>,
    labels: &[usize],
    k: usize,
    old: &DMatrix<f64>,
) -> DMatrix<f64> {
    let d = points.ncols();
    let mut sums: DMatrix<f64> = DMatrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        counts[c] += 1;
        for j in 0..d {
            sums[(c, j)] += points[(i, j)];
        }
    }
    let mut centroids = DMatrix::zeros(k, d);
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..d {
                centroids[(c, j)] = sums[(c, j)] / counts[c] as f64;
            }
        } else {
            for j in 0..d {
                centroids[(c, j)] = old[(c, j)];
            }
        }
    }
    if counts.contains(&0) {
        let mut dist: Vec<f64> = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if counts[c] > 0 {
                    squared_distance(points, i, &centroids, c)
                } else {
                    0.0
                }
            })
            .collect();
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = dist
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("distances are finite"))
                .map(|(i, _)| i)
                .expect("points are nonempty");
            for j in 0..d {
                centroids[(c, j)] = points[(far, j)];
            }
            dist[far] = 0.0;
        }
    }
    centroids
}

fn lloyd_run(points: &DMatrix<f64>, k: usize, seed: u64, max_iter: usize) -> RawFit {
    let t = points.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, t, k);
    let mut centroids = DMatrix::from_fn(k, points.ncols(), |c, j| points[(picks.index(c), j)]);
    let mut labels = assign_all(points, &centroids);
    let mut inertia = inertia_of(points, &centroids, &labels);
    for _ in 0..max_iter {
        centroids = update_centroids(points, &labels, k, &centroids);
        let new_labels = assign_all(points, &centroids);
        let new_inertia = inertia_of(points, &centroids, &new_labels);
        assert!(
            new_inertia <= inertia + INERTIA_SLACK * (1.0 + inertia),
            "Lloyd's iteration increased inertia: {inertia} -> {new_inertia}"
        );
        let stable = new_labels == labels;
        labels = new_labels;
        inertia = new_inertia;
        if stable {
            break;
        }
    }
    RawFit {
        centroids,
        labels,
        inertia,
    }
}

fn count_distinct_rows(points: &DMatrix<f64>) -> usize {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for i in 0..points.nrows() {
        let key: Vec<u64> = (0..points.ncols())
            .map(|j| points[(i, j)].to_bits())
            .collect();
        seen.insert(key);
    }
    seen.len()
}

fn lex_less(centroids: &DMatrix<f64>, a: usize, b: usize) -> bool {
    for j in 0..centroids.ncols() {
        if centroids[(a, j)] != centroids[(b, j)] {
            return centroids[(a, j)] < centroids[(b, j)];
        }
    }
    false
}

/// Relabel clusters into canonical regime ids: descending size, ties by
/// lexicographic centroid order, ids starting at 1.
fn canonicalize(fit: RawFit, k: usize) -> ClusterModel {
    let mut sizes = vec![0usize; k];
    for &c in &fit.labels {
        sizes[c] += 1;
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        sizes[b]
            .cmp(&sizes[a])
            .then_with(|| {
                if lex_less(&fit.centroids, a, b) {
                    std::cmp::Ordering::Less
                } else if lex_less(&fit.centroids, b, a) {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Equal
                }
            })
    });
    let mut regime_of = vec![0usize; k];
    for (rank, &old) in order.iter().enumerate() {
        regime_of[old] = rank + 1;
    }
    let centroids = DMatrix::from_fn(k, fit.centroids.ncols(), |r, j| {
        fit.centroids[(order[r], j)]
    });
    let train_labels = fit.labels.iter().map(|&c| regime_of[c]).collect();
    ClusterModel {
        k,
        centroids,
        train_labels,
        inertia: fit.inertia,
        silhouette_by_k: BTreeMap::new(),
    }
}

pub fn kmeans(scores: &ScoreMatrix, k: usize, n_init: usize, seed: u64) -> Result<ClusterModel> {
    kmeans_with(scores, k, n_init, seed, DEFAULT_MAX_ITER)
}

pub fn kmeans_with(
    scores: &ScoreMatrix,
    k: usize,
    n_init: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterModel> {
    let points = &scores.scores;
    let t = points.nrows();
    if t == 0 {
        return Err(Error::EmptyInput { what: "scores" });
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { what: "scores" });
    }
    if k < 2 || k > t {
        return Err(Error::InvalidK { k, min: 2, max: t });
    }
    if n_init < 1 {
        return Err(Error::InvalidConfig {
            detail: "n_init must be at least 1".to_string(),
        });
    }
    let distinct = count_distinct_rows(points);
    if k > distinct {
        return Err(Error::TooFewPoints { k, distinct });
    }

    let best = (0..n_init)
        .into_par_iter()
        .map(|r| (r, lloyd_run(points, k, derive_seed(seed, r as u64), max_iter)))
        .reduce_with(|a, b| {
            // (inertia, restart index) lexicographic minimum, so the winner
            // is identical no matter how the reduction tree is shaped.
            if b.1.inertia < a.1.inertia || (b.1.inertia == a.1.inertia && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("n_init >= 1");

    Ok(canonicalize(best.1, k))
}

/// Average silhouette width over all points, euclidean distance. Points in
/// singleton clusters contribute s(i) = 0, as do points where both the
/// intra- and inter-cluster means vanish.
pub fn average_silhouette(scores: &ScoreMatrix, labels: &[usize]) -> Result<f64> {
    let points = &scores.scores;
    let n = points.nrows();
    if n == 0 {
        return Err(Error::EmptyInput { what: "scores" });
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            what: "labels vs score rows",
            left: labels.len(),
            right: n,
        });
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { what: "scores" });
    }
    let cluster_ids: Vec<usize> = {
        let mut ids: Vec<usize> = labels.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    if cluster_ids.len() < 2 {
        return Err(Error::SingleCluster);
    }
    let index_of: BTreeMap<usize, usize> = cluster_ids
        .iter()
        .enumerate()
        .map(|(pos, &id)| (id, pos))
        .collect();
    let counts: Vec<usize> = {
        let mut c = vec![0usize; cluster_ids.len()];
        for &l in labels {
            c[index_of[&l]] += 1;
        }
        c
    };

    // Collected per point and summed sequentially: a parallel sum's
    // reduction order varies with the thread count, and the result here
    // must not.
    let widths: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            // Accumulate this point's distance mass per cluster in one pass.
            let mut sums = vec![0.0f64; cluster_ids.len()];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut acc = 0.0;
                for col in 0..points.ncols() {
                    let d = points[(i, col)] - points[(j, col)];
                    acc += d * d;
                }
                sums[index_of[&labels[j]]] += acc.sqrt();
            }
            let own = index_of[&labels[i]];
            if counts[own] == 1 {
                return 0.0;
            }
            let a = sums[own] / (counts[own] - 1) as f64;
            let b = sums
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != own)
                .map(|(c, s)| s / counts[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();
    Ok(widths.iter().sum::<f64>() / n as f64)
}

/// Fit k-means for every k in [k_min, k_max] and keep the k with the
/// largest average silhouette width, ties toward smaller k. The returned
/// model carries the full silhouette-by-k table.
pub fn select_k(
    scores: &ScoreMatrix,
    k_min: usize,
    k_max: usize,
    n_init: usize,
    seed: u64,
) -> Result<ClusterModel> {
    let t = scores.scores.nrows();
    if k_min < 2 || k_min > k_max {
        return Err(Error::InvalidK {
            k: k_min,
            min: 2,
            max: k_max.min(t.saturating_sub(1)),
        });
    }
    if t < 2 || k_max > t - 1 {
        return Err(Error::InvalidK {
            k: k_max,
            min: 2,
            max: t.saturating_sub(1),
        });
    }

    let mut widths = BTreeMap::new();
    let mut best: Option<(f64, ClusterModel)> = None;
    for k in k_min..=k_max {
        let model = kmeans(scores, k, n_init, seed)?;
        let width = average_silhouette(scores, &model.train_labels)?;
        widths.insert(k, width);
        let better = match &best {
            None => true,
            Some((best_width, _)) => width > *best_width,
        };
        if better {
            best = Some((width, model));
        }
    }
    let (_, mut model) = best.expect("k range is nonempty");
    model.silhouette_by_k = widths;
    Ok(model)
}

/// Map each score row to the canonical regime of its nearest centroid.
/// Ties go to the lower regime id.
pub fn assign(model: &ClusterModel, scores: &ScoreMatrix) -> Result<Vec<usize>> {
    if scores.scores.ncols() != model.centroids.ncols() {
        return Err(Error::LengthMismatch {
            what: "score dimension vs centroid dimension",
            left: scores.scores.ncols(),
            right: model.centroids.ncols(),
        });
    }
    if scores.scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { what: "scores" });
    }
    Ok(assign_all(&scores.scores, &model.centroids)
        .into_iter()
        .map(|c| c + 1)
        .collect())
}
