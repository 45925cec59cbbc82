//! Binary classification tree over numeric features.
//!
//! A split sends `x[feature] < threshold` left, where `threshold` is the
//! smallest training value on the right side. Thresholds are therefore always
//! observed values, so a strictly increasing transform of a feature maps the
//! fitted tree onto the tree fitted to the transformed data.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    /// C4.5 rule: best threshold per feature by information gain, then the
    /// feature with the highest gain ratio among those with at least average gain.
    GainRatio,
    InfoGain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub criterion: SplitCriterion,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 2,
            max_depth: None,
            criterion: SplitCriterion::GainRatio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    /// Training rows per class, indexed by label index.
    Leaf { counts: [usize; 2] },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root at index 0.
    pub nodes: Vec<TreeNode>,
}

pub(crate) fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
}

/// Best threshold on one feature by information gain, or `None` when no
/// split leaves `min_leaf` rows on both sides.
fn best_threshold(
    rows: &[Vec<f64>],
    labels: &[usize],
    idx: &[usize],
    feature: usize,
    min_leaf: usize,
    parent_entropy: f64,
) -> Option<Candidate> {
    let mut sorted = idx.to_vec();
    sorted.sort_by(|&a, &b| rows[a][feature].total_cmp(&rows[b][feature]));
    let n = sorted.len();
    let mut total = [0usize; 2];
    for &i in &sorted {
        total[labels[i]] += 1;
    }
    let mut left = [0usize; 2];
    let mut best: Option<Candidate> = None;
    for pos in 1..n {
        left[labels[sorted[pos - 1]]] += 1;
        let (lo, hi) = (rows[sorted[pos - 1]][feature], rows[sorted[pos]][feature]);
        if lo == hi || pos < min_leaf || n - pos < min_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let (wl, wr) = (pos as f64 / n as f64, (n - pos) as f64 / n as f64);
        let gain = parent_entropy - wl * entropy(&left) - wr * entropy(&right);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let split_info = entropy(&[pos, n - pos]);
            best = Some(Candidate {
                feature,
                threshold: hi,
                gain,
                ratio: if split_info > 0.0 { gain / split_info } else { 0.0 },
            });
        }
    }
    best
}

fn choose(candidates: Vec<Candidate>, criterion: SplitCriterion) -> Option<Candidate> {
    match criterion {
        SplitCriterion::InfoGain => candidates
            .into_iter()
            .reduce(|a, b| if b.gain > a.gain { b } else { a }),
        SplitCriterion::GainRatio => {
            if candidates.is_empty() {
                return None;
            }
            let mean = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
            candidates
                .into_iter()
                .filter(|c| c.gain >= mean - 1e-12)
                .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
        }
    }
}

/// Per-node feature sampling used by the random forest.
pub(crate) struct FeatureSampler<'r, R: Rng> {
    pub rng: &'r mut R,
    pub per_split: usize,
}

pub(crate) fn labels_of(matrix: &FeatureMatrix) -> Vec<usize> {
    matrix.targets().iter().map(|t| t.index()).collect()
}

pub(crate) fn check_trainable(matrix: &FeatureMatrix) -> Result<()> {
    let counts = matrix.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClassInput);
    }
    Ok(())
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `idx` (duplicates allowed).
    pub(crate) fn grow<R: Rng>(
        matrix: &FeatureMatrix,
        labels: &[usize],
        idx: Vec<usize>,
        params: &TreeParams,
        mut sampler: Option<FeatureSampler<'_, R>>,
    ) -> DecisionTree {
        let rows = matrix.rows();
        let d = matrix.n_features();
        let min_leaf = params.min_leaf.max(1);
        let mut nodes = Vec::new();
        // rows reaching the node, depth, slot to patch in the parent
        type Pending = (Vec<usize>, usize, Option<(usize, bool)>);
        let mut stack: Vec<Pending> = vec![(idx, 0, None)];
        while let Some((idx, depth, parent)) = stack.pop() {
            let id = nodes.len();
            if let Some((p, is_left)) = parent {
                if let TreeNode::Split { left, right, .. } = &mut nodes[p] {
                    *(if is_left { left } else { right }) = id;
                }
            }
            let mut counts = [0usize; 2];
            for &i in &idx {
                counts[labels[i]] += 1;
            }
            let pure = counts[0] == 0 || counts[1] == 0;
            let too_deep = params.max_depth.is_some_and(|m| depth >= m);
            if pure || too_deep || idx.len() < 2 * min_leaf {
                nodes.push(TreeNode::Leaf { counts });
                continue;
            }
            let h = entropy(&counts);
            let chosen = match sampler.as_mut() {
                None => {
                    let candidates = (0..d)
                        .filter_map(|f| best_threshold(rows, labels, &idx, f, min_leaf, h))
                        .collect();
                    choose(candidates, params.criterion)
                }
                Some(s) => {
                    // Visit features in random order; look at `per_split` of them,
                    // then keep going only until some split with positive gain appears.
                    let mut order: Vec<usize> = (0..d).collect();
                    order.shuffle(s.rng);
                    let mut candidates = Vec::new();
                    for (visited, &f) in order.iter().enumerate() {
                        if visited >= s.per_split && candidates.iter().any(|c: &Candidate| c.gain > 0.0) {
                            break;
                        }
                        candidates.extend(best_threshold(rows, labels, &idx, f, min_leaf, h));
                    }
                    choose(candidates, params.criterion)
                }
            };
            let Some(split) = chosen else {
                nodes.push(TreeNode::Leaf { counts });
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| rows[i][split.feature] < split.threshold);
            nodes.push(TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: usize::MAX,
                right: usize::MAX,
            });
            // Right pushed first so the left subtree is numbered first.
            stack.push((right, depth + 1, Some((id, false))));
            stack.push((left, depth + 1, Some((id, true))));
        }
        DecisionTree { nodes }
    }

    pub fn leaf_counts(&self, row: &[f64]) -> [usize; 2] {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { counts } => return *counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] < *threshold { *left } else { *right },
            }
        }
    }

    /// Fraction of Effective training rows in the reached leaf.
    pub fn score(&self, row: &[f64]) -> f64 {
        let c = self.leaf_counts(row);
        let n = c[0] + c[1];
        if n == 0 {
            0.5
        } else {
            c[1] as f64 / n as f64
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub fn train_decision_tree(matrix: &FeatureMatrix, params: &TreeParams) -> Result<DecisionTree> {
    check_trainable(matrix)?;
    let labels = labels_of(matrix);
    Ok(DecisionTree::grow::<rand_chacha::ChaCha8Rng>(
        matrix,
        &labels,
        (0..matrix.n_rows()).collect(),
        params,
        None,
    ))
}
