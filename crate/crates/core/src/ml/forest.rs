use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{check_trainable, labels_of, DecisionTree, FeatureSampler, SplitCriterion, TreeParams};
use crate::error::Result;
use crate::model::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    /// `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub criterion: SplitCriterion,
    /// Turning this off trains every tree on the full training set.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 100,
            features_per_split: None,
            min_leaf: 1,
            max_depth: None,
            criterion: SplitCriterion::InfoGain,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Fraction of trees whose leaf votes Effective.
    pub fn score(&self, row: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.score(row) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}

/// Tree `i` draws from its own ChaCha stream, so parallel and serial training agree.
pub fn train_random_forest(matrix: &FeatureMatrix, params: &ForestParams, seed: u64) -> Result<RandomForest> {
    check_trainable(matrix)?;
    let labels = labels_of(matrix);
    let n = matrix.n_rows();
    let d = matrix.n_features();
    let per_split = params
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let tree_params = TreeParams {
        min_leaf: params.min_leaf,
        max_depth: params.max_depth,
        criterion: params.criterion,
    };
    let trees = (0..params.trees.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let sampler = (per_split < d).then_some(FeatureSampler {
                rng: &mut rng,
                per_split,
            });
            DecisionTree::grow(matrix, &labels, idx, &tree_params, sampler)
        })
        .collect();
    Ok(RandomForest { trees })
}
