//! Tie-aware Spearman rank correlation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClassRecord, MetricId};

/// 1-based ranks; ties share the mean of the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn has_two_distinct(v: &[f64]) -> bool {
    v.iter().any(|&a| a != v[0])
}

/// Pearson correlation of the average ranks of `x` and `y`.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooFewValues {
            needed: 3,
            found: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite value".into()));
    }
    if !has_two_distinct(x) || !has_two_distinct(y) {
        return Err(Error::DegenerateInput("constant sequence".into()));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

/// Which records a correlation table was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    /// Every ingested record.
    Raw,
    /// Only records that survived quartile labeling.
    Labeled,
}

impl Population {
    pub fn as_str(self) -> &'static str {
        match self {
            Population::Raw => "raw",
            Population::Labeled => "labeled",
        }
    }
}

impl std::str::FromStr for Population {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Population::Raw),
            "labeled" => Ok(Population::Labeled),
            other => Err(Error::InvalidValue(format!(
                "population must be `raw` or `labeled`, found `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub metric: MetricId,
    /// `None` when the metric was skipped; see `skipped`.
    pub rho: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub target: MetricId,
    /// Entries with `|rho| >= threshold`, by `|rho|` descending.
    pub entries: Vec<(MetricId, f64)>,
    /// Every independent variable in canonical order.
    pub full: Vec<CorrelationEntry>,
    pub threshold: f64,
    pub population: Population,
    pub population_size: usize,
}

/// Correlates each of the 34 independent variables with `target`.
pub fn correlation_table(
    records: &[ClassRecord],
    target: MetricId,
    threshold: f64,
    population: Population,
) -> Result<CorrelationReport> {
    if records.len() < 3 {
        return Err(Error::TooFewValues {
            needed: 3,
            found: records.len(),
        });
    }
    let y: Vec<f64> = records
        .iter()
        .map(|r| {
            r.get(target).ok_or_else(|| Error::MissingFeature {
                class_id: r.class_id.clone(),
                metric: target,
            })
        })
        .collect::<Result<_>>()?;

    let metrics: Vec<MetricId> = MetricId::independent().collect();
    let full: Vec<CorrelationEntry> = metrics
        .par_iter()
        .map(|&metric| {
            let x: Option<Vec<f64>> = records.iter().map(|r| r.get(metric)).collect();
            let result = match x {
                Some(x) => spearman(&x, &y).map_err(|e| e.to_string()),
                None => Err("absent from some records".to_string()),
            };
            match result {
                Ok(rho) => CorrelationEntry {
                    metric,
                    rho: Some(rho),
                    skipped: None,
                },
                Err(reason) => CorrelationEntry {
                    metric,
                    rho: None,
                    skipped: Some(reason),
                },
            }
        })
        .collect();

    let mut entries: Vec<(MetricId, f64)> = full
        .iter()
        .filter_map(|e| e.rho.map(|r| (e.metric, r)))
        .filter(|(_, r)| r.abs() >= threshold)
        .collect();
    entries.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    Ok(CorrelationReport {
        target,
        entries,
        full,
        threshold,
        population,
        population_size: records.len(),
    })
}
