//! CART decision tree with Gini impurity, binary classes only.
//!
//! Split search scans features in index order and thresholds in ascending
//! order, keeping the first strictly best weighted Gini; thresholds are
//! midpoints between consecutive distinct feature values. `x <= threshold`
//! goes left. A node splits only if both children keep at least `min_leaf`
//! samples, depth is below `max_depth`, and impurity strictly improves.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Branch {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Fraction of positive-class samples in this leaf.
        p_pos: f64,
    },
}

/// Nodes in an arena; index 0 is the root. score(x) = leaf p_pos, and the
/// natural decision threshold is 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub nodes: Vec<Node>,
}

fn gini(n_pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = n_pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Split {
    feature: usize,
    threshold: f64,
    weighted_gini: f64,
}

fn best_split(
    x: &DMatrix<f64>,
    y: &[bool],
    rows: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    let total_pos = rows.iter().filter(|&&i| y[i]).count();
    let parent = gini(total_pos, n);
    let mut best: Option<Split> = None;
    for feature in 0..x.ncols() {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            x[(a, feature)]
                .partial_cmp(&x[(b, feature)])
                .expect("finite features")
        });
        let mut left_n = 0usize;
        let mut left_pos = 0usize;
        for (pos, &i) in order.iter().enumerate() {
            left_n += 1;
            if y[i] {
                left_pos += 1;
            }
            if pos + 1 == n {
                break;
            }
            let here = x[(i, feature)];
            let next = x[(order[pos + 1], feature)];
            if here == next {
                continue;
            }
            if left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let weighted = (left_n as f64 * gini(left_pos, left_n)
                + (n - left_n) as f64 * gini(total_pos - left_pos, n - left_n))
                / n as f64;
            let improves = match &best {
                None => weighted < parent - 1e-15,
                Some(b) => weighted < b.weighted_gini - 1e-15,
            };
            if improves {
                best = Some(Split {
                    feature,
                    threshold: here + (next - here) / 2.0,
                    weighted_gini: weighted,
                });
            }
        }
    }
    best
}

fn grow(
    x: &DMatrix<f64>,
    y: &[bool],
    rows: Vec<usize>,
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let n_pos = rows.iter().filter(|&&i| y[i]).count();
    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            p_pos: n_pos as f64 / rows.len() as f64,
        });
        nodes.len() - 1
    };
    if depth >= max_depth || n_pos == 0 || n_pos == rows.len() || rows.len() < 2 * min_leaf {
        return make_leaf(nodes);
    }
    let Some(split) = best_split(x, y, &rows, min_leaf) else {
        return make_leaf(nodes);
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| x[(i, split.feature)] <= split.threshold);
    let id = nodes.len();
    nodes.push(Node::Branch {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = grow(x, y, left_rows, depth + 1, max_depth, min_leaf, nodes);
    let right = grow(x, y, right_rows, depth + 1, max_depth, min_leaf, nodes);
    nodes[id] = Node::Branch {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

pub(super) fn fit_tree(
    x: &DMatrix<f64>,
    y: &[bool],
    max_depth: usize,
    min_leaf: usize,
) -> Result<TreeParams> {
    if min_leaf == 0 {
        return Err(Error::InvalidConfig {
            detail: "tree min_leaf must be at least 1".to_string(),
        });
    }
    let mut nodes = Vec::new();
    grow(
        x,
        y,
        (0..x.nrows()).collect(),
        0,
        max_depth,
        min_leaf,
        &mut nodes,
    );
    Ok(TreeParams { nodes })
}

pub(super) fn tree_scores(params: &TreeParams, x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let mut node = 0usize;
            loop {
                match &params.nodes[node] {
                    Node::Leaf { p_pos } => return *p_pos,
                    Node::Branch {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        node = if x[(i, *feature)] <= *threshold {
                            *left
                        } else {
                            *right
                        };
                    }
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sign_rule_recovers_threshold_in_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let n_per = 10;
        let mut x = DMatrix::zeros(2 * n_per, 1);
        let mut y = vec![false; 2 * n_per];
        for i in 0..n_per {
            x[(i, 0)] = rng.random_range(-2.0..-0.3);
            x[(n_per + i, 0)] = rng.random_range(0.4..2.0);
            y[n_per + i] = true;
        }
        let params = fit_tree(&x, &y, 8, 5).unwrap();
        let Node::Branch { threshold, .. } = params.nodes[0] else {
            panic!("expected a split at the root");
        };
        let max_neg = (0..n_per).map(|i| x[(i, 0)]).fold(f64::MIN, f64::max);
        let min_pos = (0..n_per).map(|i| x[(n_per + i, 0)]).fold(f64::MAX, f64::min);
        assert!(threshold > max_neg && threshold < min_pos);
        // children are pure, so the tree stops at depth 1
        assert_eq!(params.nodes.len(), 3);
        let scores = tree_scores(&params, &x);
        for (i, s) in scores.iter().enumerate() {
            assert_eq!(*s >= 0.5, y[i]);
        }
    }

    #[test]
    fn min_leaf_blocks_tiny_splits() {
        // 4 + 4 points: any split leaves a side below min_leaf = 5
        let x = DMatrix::from_fn(8, 1, |i, _| i as f64);
        let y = vec![false, false, false, false, true, true, true, true];
        let params = fit_tree(&x, &y, 8, 5).unwrap();
        assert_eq!(params.nodes.len(), 1);
        assert!(matches!(params.nodes[0], Node::Leaf { p_pos } if p_pos == 0.5));
    }

    #[test]
    fn pure_node_stays_leaf() {
        let x = DMatrix::from_fn(12, 1, |i, _| i as f64);
        let y = vec![true; 12];
        let params = fit_tree(&x, &y, 8, 5).unwrap();
        assert_eq!(params.nodes.len(), 1);
        assert!(matches!(params.nodes[0], Node::Leaf { p_pos } if p_pos == 1.0));
    }

    #[test]
    fn depth_limit_caps_the_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let n = 400;
        let x = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<bool> = (0..n).map(|_| rng.random_range(0..2) == 1).collect();
        let params = fit_tree(&x, &y, 2, 5).unwrap();
        fn depth_of(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Branch { left, right, .. } => {
                    1 + depth_of(nodes, *left).max(depth_of(nodes, *right))
                }
            }
        }
        assert!(depth_of(&params.nodes, 0) <= 2);
    }

    #[test]
    fn identical_rows_cannot_split() {
        let x = DMatrix::from_element(20, 3, 0.7);
        let y: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let params = fit_tree(&x, &y, 8, 5).unwrap();
        assert_eq!(params.nodes.len(), 1);
        let scores = tree_scores(&params, &x);
        assert!(scores.iter().all(|&s| s == 0.5));
    }

    #[test]
    fn xor_needs_depth_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let n = 200;
        let mut x = DMatrix::zeros(n, 2);
        let mut y = vec![false; n];
        for i in 0..n {
            let a = rng.random_range(0..2) == 1;
            let b = rng.random_range(0..2) == 1;
            x[(i, 0)] = if a { 1.0 } else { -1.0 } + rng.random_range(-0.2..0.2);
            x[(i, 1)] = if b { 1.0 } else { -1.0 } + rng.random_range(-0.2..0.2);
            y[i] = a != b;
        }
        let deep = fit_tree(&x, &y, 8, 5).unwrap();
        let scores = tree_scores(&deep, &x);
        let correct = scores
            .iter()
            .zip(&y)
            .filter(|(s, &t)| (**s >= 0.5) == t)
            .count();
        assert!(correct as f64 / n as f64 > 0.95, "xor accuracy too low");
    }
}
