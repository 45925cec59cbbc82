//! Stratified k-fold cross-validation and the evaluation measures.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, train, ClassifierKind, ClassifierSpec};
use crate::error::{Error, Result};
use crate::model::{EffectivenessLabel, FeatureMatrix};

pub type Fold = (Vec<usize>, Vec<usize>);

/// Splits rows into `k` (train, test) pairs. Each class is shuffled and dealt
/// round-robin, continuing the rotation across classes so fold sizes stay
/// within one row of each other.
pub fn stratified_kfold(targets: &[EffectivenessLabel], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidValue(format!("k must be at least 2, found {k}")));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, t) in targets.iter().enumerate() {
        by_class[t.index()].push(i);
    }
    for (c, rows) in by_class.iter().enumerate() {
        if rows.len() < k {
            return Err(Error::TooFewPerClass {
                class: EffectivenessLabel::from_index(c).to_string(),
                count: rows.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; targets.len()];
    let mut next = 0;
    for rows in &mut by_class {
        rows.shuffle(&mut rng);
        for &i in rows.iter() {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..targets.len()).partition(|&i| fold_of[i] == f);
            (train, test)
        })
        .collect())
}

/// Area under the ROC curve by the trapezoidal rule over distinct score
/// thresholds; equal to the pairwise ranking probability with ties counted half.
pub fn auc(scores: &[f64], labels: &[EffectivenessLabel]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let pos = labels.iter().filter(|l| **l == EffectivenessLabel::Effective).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassInput);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    // Twice the area in units of one (positive, negative) cell, kept exact.
    let (mut tp, mut fp, mut twice_area) = (0u64, 0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == EffectivenessLabel::Effective {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        twice_area += (fp - fp0) * (tp + tp0);
    }
    Ok(twice_area as f64 / (2 * pos * neg) as f64)
}

/// Pooled confusion counts with Effective as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub kind: ClassifierKind,
    pub accuracy: f64,
    /// Class-support-weighted averages.
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// Over pooled out-of-fold scores.
    pub auc: f64,
    pub confusion: Confusion,
    pub folds: usize,
    pub seed: u64,
    /// Out-of-fold score per input row.
    #[serde(skip)]
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: usize,
    pub seed: u64,
    pub classifiers: Vec<ClassifierReport>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Accuracy and weighted precision, recall and F-measure from a confusion table.
pub fn measures(c: &Confusion) -> (f64, f64, f64, f64) {
    let n = c.tp + c.tn + c.fp + c.fn_;
    let accuracy = ratio(c.tp + c.tn, n);
    // (hits, predicted, actual) per class
    let classes = [(c.tn, c.tn + c.fn_, c.tn + c.fp), (c.tp, c.tp + c.fp, c.tp + c.fn_)];
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for (hits, predicted, actual) in classes {
        let w = ratio(actual, n);
        let (pc, rc) = (ratio(hits, predicted), ratio(hits, actual));
        let fc = if pc + rc > 0.0 { 2.0 * pc * rc / (pc + rc) } else { 0.0 };
        p += w * pc;
        r += w * rc;
        f += w * fc;
    }
    (accuracy, p, r, f)
}

/// Trains on each fold's complement, scores its test rows, and pools the results.
pub fn evaluate(matrix: &FeatureMatrix, spec: &ClassifierSpec, k: usize, seed: u64) -> Result<ClassifierReport> {
    let folds = stratified_kfold(matrix.targets(), k, seed)?;
    let per_fold: Vec<Result<Vec<(usize, f64)>>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, (train_idx, test_idx))| {
            let model =
                train(&matrix.subset(train_idx), spec, derive_seed(seed, f as u64)).map_err(|e| Error::Fold {
                    fold: f,
                    source: Box::new(e),
                })?;
            test_idx
                .iter()
                .map(|&i| Ok((i, model.score(&matrix.rows()[i])?)))
                .collect()
        })
        .collect();
    let mut scores = vec![0.0; matrix.n_rows()];
    for fold in per_fold {
        for (i, s) in fold? {
            scores[i] = s;
        }
    }
    let mut confusion = Confusion::default();
    for (s, t) in scores.iter().zip(matrix.targets()) {
        match (*s >= 0.5, *t == EffectivenessLabel::Effective) {
            (true, true) => confusion.tp += 1,
            (false, false) => confusion.tn += 1,
            (true, false) => confusion.fp += 1,
            (false, true) => confusion.fn_ += 1,
        }
    }
    let (accuracy, precision, recall, f_measure) = measures(&confusion);
    Ok(ClassifierReport {
        kind: spec.kind(),
        accuracy,
        precision,
        recall,
        f_measure,
        auc: auc(&scores, matrix.targets())?,
        confusion,
        folds: k,
        seed,
        scores,
    })
}

pub fn evaluate_all(matrix: &FeatureMatrix, specs: &[ClassifierSpec], k: usize, seed: u64) -> Result<EvalReport> {
    let classifiers = specs
        .iter()
        .map(|s| evaluate(matrix, s, k, seed))
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        folds: k,
        seed,
        classifiers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use EffectivenessLabel::*;

    fn labels(bits: &[u8]) -> Vec<EffectivenessLabel> {
        bits.iter()
            .map(|&b| EffectivenessLabel::from_index(b as usize))
            .collect()
    }

    #[test]
    fn exact_stratification() {
        let targets: Vec<_> = (0..100).map(|i| EffectivenessLabel::from_index(i % 2)).collect();
        let folds = stratified_kfold(&targets, 10, 9).unwrap();
        let mut all: Vec<usize> = Vec::new();
        for (train, test) in &folds {
            let eff = test.iter().filter(|&&i| targets[i] == Effective).count();
            assert_eq!((eff, test.len() - eff), (5, 5));
            assert_eq!(train.len() + test.len(), 100);
            all.extend(test);
        }
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(folds, stratified_kfold(&targets, 10, 9).unwrap());
    }

    #[test]
    fn too_few_per_class() {
        let targets = labels(&[1, 1, 1, 0, 0]);
        assert!(matches!(
            stratified_kfold(&targets, 3, 0),
            Err(Error::TooFewPerClass { count: 2, .. })
        ));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &labels(&[1, 1, 0, 0])).unwrap(), 1.0);
        assert_eq!(auc(&[0.5; 6], &labels(&[1, 0, 1, 0, 0, 1])).unwrap(), 0.5);
        // pairs: (0.8 vs 0.3) win, (0.8 vs 0.8) tie, (0.4 vs 0.3) win, (0.4 vs 0.8) loss
        assert_eq!(auc(&[0.8, 0.4, 0.3, 0.8], &labels(&[1, 1, 0, 0])).unwrap(), 2.5 / 4.0);
        assert!(matches!(
            auc(&[0.1, 0.2], &labels(&[1, 1])),
            Err(Error::SingleClassInput)
        ));
    }

    #[test]
    fn weighted_measures() {
        // 4 effective (3 caught), 6 non-effective (1 false alarm)
        let c = Confusion {
            tp: 3,
            fn_: 1,
            tn: 5,
            fp: 1,
        };
        let (acc, p, r, f) = measures(&c);
        assert_eq!(acc, 0.8);
        let (p1, p0) = (3.0 / 4.0, 5.0 / 6.0);
        let (r1, r0) = (3.0 / 4.0, 5.0 / 6.0);
        assert!((p - (0.4 * p1 + 0.6 * p0)).abs() < 1e-15);
        assert!((r - (0.4 * r1 + 0.6 * r0)).abs() < 1e-15);
        assert!((f - (0.4 * p1 + 0.6 * p0)).abs() < 1e-15);
    }
}
