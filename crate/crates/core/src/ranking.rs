//! Entropy-based and OneR feature ranking.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml::tree::entropy;
use crate::model::{EffectivenessLabel, FeatureMatrix, MetricId};

/// Minimum majority-class count per OneR bucket.
pub const ONER_MIN_BUCKET: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscretizationMethod {
    Mdl,
    EqualFrequency(usize),
}

/// Cut points are observed values: `x < cut` falls below the cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub cut_points: Vec<f64>,
    pub method: DiscretizationMethod,
}

impl Discretization {
    /// Bin index of each value (number of cut points `<= x`).
    pub fn apply(&self, feature: &[f64]) -> Vec<usize> {
        feature
            .iter()
            .map(|x| self.cut_points.partition_point(|c| c <= x))
            .collect()
    }

    pub fn bins(&self) -> usize {
        self.cut_points.len() + 1
    }
}

fn class_counts(labels: &[usize]) -> [usize; 2] {
    let mut c = [0; 2];
    for &l in labels {
        c[l] += 1;
    }
    c
}

fn classes_present(c: &[usize; 2]) -> f64 {
    c.iter().filter(|&&n| n > 0).count() as f64
}

/// Recursive entropy-minimizing cut selection on `sorted[lo..hi]`.
fn mdl_split(sorted: &[(f64, usize)], cuts: &mut Vec<f64>) {
    let n = sorted.len();
    if n < 2 {
        return;
    }
    let labels: Vec<usize> = sorted.iter().map(|p| p.1).collect();
    let total = class_counts(&labels);
    let h = entropy(&total);
    let mut left = [0usize; 2];
    let mut best: Option<(usize, f64, [usize; 2])> = None;
    for pos in 1..n {
        left[sorted[pos - 1].1] += 1;
        if sorted[pos - 1].0 == sorted[pos].0 {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let e = (pos as f64 * entropy(&left) + (n - pos) as f64 * entropy(&right)) / n as f64;
        if best.is_none_or(|b| e < b.1) {
            best = Some((pos, e, left));
        }
    }
    let Some((pos, e, left)) = best else { return };
    let right = [total[0] - left[0], total[1] - left[1]];
    let gain = h - e;
    let (k, k1, k2) = (classes_present(&total), classes_present(&left), classes_present(&right));
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h - k1 * entropy(&left) - k2 * entropy(&right));
    let nf = n as f64;
    if gain <= ((nf - 1.0).log2() + delta) / nf {
        return;
    }
    mdl_split(&sorted[..pos], cuts);
    cuts.push(sorted[pos].0);
    mdl_split(&sorted[pos..], cuts);
}

fn sorted_pairs(feature: &[f64], labels: &[EffectivenessLabel]) -> Vec<(f64, usize)> {
    let mut pairs: Vec<(f64, usize)> = feature.iter().zip(labels).map(|(&x, l)| (x, l.index())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    pairs
}

/// Supervised entropy discretization with the MDL stopping rule.
pub fn mdl_discretize(feature: &[f64], labels: &[EffectivenessLabel]) -> Result<Discretization> {
    if feature.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: feature.len(),
            right: labels.len(),
        });
    }
    let mut cut_points = Vec::new();
    mdl_split(&sorted_pairs(feature, labels), &mut cut_points);
    Ok(Discretization {
        cut_points,
        method: DiscretizationMethod::Mdl,
    })
}

/// Counts per (bin, class).
fn contingency(bins: &[usize], labels: &[EffectivenessLabel]) -> Vec<[usize; 2]> {
    let width = bins.iter().copied().max().map_or(0, |m| m + 1);
    let mut table = vec![[0usize; 2]; width];
    for (&b, l) in bins.iter().zip(labels) {
        table[b][l.index()] += 1;
    }
    table
}

fn class_entropy(labels: &[EffectivenessLabel]) -> f64 {
    let mut c = [0; 2];
    for l in labels {
        c[l.index()] += 1;
    }
    entropy(&c)
}

fn bin_entropy(table: &[[usize; 2]]) -> f64 {
    entropy(&table.iter().map(|r| r[0] + r[1]).collect::<Vec<_>>())
}

/// `H(class) - H(class | bin)` in bits.
pub fn info_gain(bins: &[usize], labels: &[EffectivenessLabel]) -> f64 {
    let n = bins.len() as f64;
    let table = contingency(bins, labels);
    let conditional: f64 = table.iter().map(|r| (r[0] + r[1]) as f64 / n * entropy(r)).sum();
    (class_entropy(labels) - conditional).max(0.0)
}

pub fn gain_ratio(bins: &[usize], labels: &[EffectivenessLabel]) -> f64 {
    let hb = bin_entropy(&contingency(bins, labels));
    if hb > 0.0 {
        info_gain(bins, labels) / hb
    } else {
        0.0
    }
}

pub fn symmetric_uncertainty(bins: &[usize], labels: &[EffectivenessLabel]) -> f64 {
    let denom = class_entropy(labels) + bin_entropy(&contingency(bins, labels));
    if denom > 0.0 {
        2.0 * info_gain(bins, labels) / denom
    } else {
        0.0
    }
}

fn majority(c: &[usize; 2]) -> usize {
    usize::from(c[1] > c[0])
}

/// Training accuracy of a one-attribute rule over sorted-value buckets.
///
/// A bucket grows until its majority class has [`ONER_MIN_BUCKET`] rows, then
/// absorbs following rows of that class, then any rows sharing the last value.
pub fn oner_score(feature: &[f64], labels: &[EffectivenessLabel]) -> Result<f64> {
    if feature.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: feature.len(),
            right: labels.len(),
        });
    }
    if feature.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sorted = sorted_pairs(feature, labels);
    let n = sorted.len();
    let mut correct = 0;
    let mut i = 0;
    while i < n {
        let mut counts = [0usize; 2];
        while i < n && counts[majority(&counts)] < ONER_MIN_BUCKET {
            counts[sorted[i].1] += 1;
            i += 1;
        }
        while i < n && sorted[i].1 == majority(&counts) {
            counts[sorted[i].1] += 1;
            i += 1;
        }
        while i < n && sorted[i].0 == sorted[i - 1].0 {
            counts[sorted[i].1] += 1;
            i += 1;
        }
        correct += counts[majority(&counts)];
    }
    Ok(correct as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RankingAlgorithm {
    GainRatio,
    InfoGain,
    SymmetricUncertainty,
    OneR,
}

impl RankingAlgorithm {
    pub const ALL: [RankingAlgorithm; 4] = [
        RankingAlgorithm::GainRatio,
        RankingAlgorithm::InfoGain,
        RankingAlgorithm::SymmetricUncertainty,
        RankingAlgorithm::OneR,
    ];

    pub fn short(self) -> &'static str {
        match self {
            RankingAlgorithm::GainRatio => "gain_ratio",
            RankingAlgorithm::InfoGain => "info_gain",
            RankingAlgorithm::SymmetricUncertainty => "symmetric_uncertainty",
            RankingAlgorithm::OneR => "oner",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            RankingAlgorithm::GainRatio => "Gain Ratio",
            RankingAlgorithm::InfoGain => "Information Gain",
            RankingAlgorithm::SymmetricUncertainty => "Symmetric Uncertainty",
            RankingAlgorithm::OneR => "OneR",
        }
    }
}

impl fmt::Display for RankingAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for RankingAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RankingAlgorithm::ALL
            .into_iter()
            .find(|a| a.short() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown ranking algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub algorithm: RankingAlgorithm,
    /// Score descending; ties by metric name.
    pub entries: Vec<(MetricId, f64)>,
}

impl RankingTable {
    pub fn top(&self, n: usize) -> impl Iterator<Item = MetricId> + '_ {
        self.entries.iter().take(n).map(|e| e.0)
    }
}

/// Scores one feature column.
pub fn score_feature(feature: &[f64], labels: &[EffectivenessLabel], algorithm: RankingAlgorithm) -> Result<f64> {
    if algorithm == RankingAlgorithm::OneR {
        return oner_score(feature, labels);
    }
    let bins = mdl_discretize(feature, labels)?.apply(feature);
    Ok(match algorithm {
        RankingAlgorithm::GainRatio => gain_ratio(&bins, labels),
        RankingAlgorithm::InfoGain => info_gain(&bins, labels),
        RankingAlgorithm::SymmetricUncertainty => symmetric_uncertainty(&bins, labels),
        RankingAlgorithm::OneR => unreachable!(),
    })
}

pub fn rank_features(matrix: &FeatureMatrix, algorithm: RankingAlgorithm) -> Result<RankingTable> {
    let labels = matrix.targets();
    let mut entries = (0..matrix.n_features())
        .into_par_iter()
        .map(|j| {
            Ok((
                matrix.feature_ids()[j],
                score_feature(&matrix.column(j), labels, algorithm)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.name().cmp(b.0.name())));
    Ok(RankingTable { algorithm, entries })
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
    fn perfect_split_measures() {
        let y = labels(&[0, 0, 1, 1]);
        let bins = [0, 0, 1, 1];
        assert_eq!(info_gain(&bins, &y), 1.0);
        assert_eq!(gain_ratio(&bins, &y), 1.0);
        assert_eq!(symmetric_uncertainty(&bins, &y), 1.0);
        let single = [0, 0, 0, 0];
        assert_eq!(info_gain(&single, &y), 0.0);
        assert_eq!(gain_ratio(&single, &y), 0.0);
        assert_eq!(symmetric_uncertainty(&single, &y), 0.0);
    }

    #[test]
    fn separating_feature_gets_one_cut() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y = labels(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let d = mdl_discretize(&x, &y).unwrap();
        assert_eq!(d.cut_points, [6.0]);
        assert!(d.cut_points[0] > 5.0 && d.cut_points[0] <= 6.0);
        assert_eq!(d.apply(&[5.0, 5.5, 6.0]), [0, 0, 1]);
    }

    #[test]
    fn constant_feature_has_no_cut() {
        let y = labels(&[0, 1, 0, 1, 1]);
        assert!(mdl_discretize(&[3.0; 5], &y).unwrap().cut_points.is_empty());
    }

    #[test]
    fn oner_baselines() {
        let y = labels(&[1, 1, 1, 1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(oner_score(&[2.0; 10], &y).unwrap(), 0.6);
        let x: Vec<f64> = (0..12).map(f64::from).collect();
        let y = labels(&[0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
        assert_eq!(oner_score(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn ties_broken_by_name() {
        let rows = vec![vec![1.0, 1.0]; 4];
        let m = FeatureMatrix::new(
            vec![MetricId::Wmc, MetricId::Amc],
            rows,
            vec![Effective, NonEffective, Effective, NonEffective],
        )
        .unwrap();
        let t = rank_features(&m, RankingAlgorithm::InfoGain).unwrap();
        assert_eq!(t.entries, [(MetricId::Amc, 0.0), (MetricId::Wmc, 0.0)]);
    }
}
