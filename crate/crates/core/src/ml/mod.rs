//! Classifiers, cross-validation and model serialization.

pub mod eval;
pub mod forest;
pub mod mlp;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use eval::{auc, evaluate, evaluate_all, stratified_kfold, ClassifierReport, Confusion, EvalReport};
pub use forest::{train_random_forest, ForestParams, RandomForest};
pub use mlp::{train_mlp, Mlp, MlpParams};
pub use tree::{train_decision_tree, DecisionTree, SplitCriterion, TreeParams};

use crate::error::{Error, Result};
use crate::model::{EffectivenessLabel, FeatureMatrix, MetricId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    DecisionTree,
    RandomForest,
    MultilayerPerceptron,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::RandomForest,
        ClassifierKind::MultilayerPerceptron,
    ];

    /// Short command-line name.
    pub fn short(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "dt",
            ClassifierKind::RandomForest => "rf",
            ClassifierKind::MultilayerPerceptron => "mlp",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "Decision Tree",
            ClassifierKind::RandomForest => "Random Forest",
            ClassifierKind::MultilayerPerceptron => "Multilayer Perceptron",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.short() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown classifier `{s}` (expected dt, rf or mlp)")))
    }
}

/// A classifier family with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum ClassifierSpec {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    MultilayerPerceptron(MlpParams),
}

impl ClassifierSpec {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::DecisionTree => ClassifierSpec::DecisionTree(TreeParams::default()),
            ClassifierKind::RandomForest => ClassifierSpec::RandomForest(ForestParams::default()),
            ClassifierKind::MultilayerPerceptron => ClassifierSpec::MultilayerPerceptron(MlpParams::default()),
        }
    }

    /// Compact JSON form, used in run manifests.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::DecisionTree(_) => ClassifierKind::DecisionTree,
            ClassifierSpec::RandomForest(_) => ClassifierKind::RandomForest,
            ClassifierSpec::MultilayerPerceptron(_) => ClassifierKind::MultilayerPerceptron,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters")]
pub enum ModelBody {
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    MultilayerPerceptron(Mlp),
}

pub const MODEL_FORMAT: &str = "testlens-model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub feature_ids: Vec<MetricId>,
    pub seed: u64,
    pub spec: ClassifierSpec,
    pub model: ModelBody,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.spec.kind()
    }

    /// Probability of Effective.
    pub fn score(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_ids.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_ids.len(),
                found: row.len(),
            });
        }
        let s = match &self.model {
            ModelBody::DecisionTree(t) => t.score(row),
            ModelBody::RandomForest(f) => f.score(row),
            ModelBody::MultilayerPerceptron(m) => m.score(row),
        };
        Ok(s.clamp(0.0, 1.0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unsupported format `{}`", model.format)));
        }
        if model.spec.kind() != model.body_kind() {
            return Err(Error::Model(
                "spec and parameters disagree on the classifier kind".into(),
            ));
        }
        Ok(model)
    }

    fn body_kind(&self) -> ClassifierKind {
        match self.model {
            ModelBody::DecisionTree(_) => ClassifierKind::DecisionTree,
            ModelBody::RandomForest(_) => ClassifierKind::RandomForest,
            ModelBody::MultilayerPerceptron(_) => ClassifierKind::MultilayerPerceptron,
        }
    }
}

/// SplitMix64 finalizer over `seed + index`, used for per-fold seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn train(matrix: &FeatureMatrix, spec: &ClassifierSpec, seed: u64) -> Result<TrainedModel> {
    let model = match spec {
        ClassifierSpec::DecisionTree(p) => ModelBody::DecisionTree(train_decision_tree(matrix, p)?),
        ClassifierSpec::RandomForest(p) => ModelBody::RandomForest(train_random_forest(matrix, p, seed)?),
        ClassifierSpec::MultilayerPerceptron(p) => ModelBody::MultilayerPerceptron(train_mlp(matrix, p, seed)?),
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.to_string(),
        feature_ids: matrix.feature_ids().to_vec(),
        seed,
        spec: spec.clone(),
        model,
    })
}

/// Label and probability of Effective; Effective iff the score is at least 0.5.
pub fn predict(model: &TrainedModel, row: &[f64]) -> Result<(EffectivenessLabel, f64)> {
    let score = model.score(row)?;
    let label = if score >= 0.5 {
        EffectivenessLabel::Effective
    } else {
        EffectivenessLabel::NonEffective
    };
    Ok((label, score))
}
