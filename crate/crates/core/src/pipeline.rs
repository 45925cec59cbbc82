//! The full analysis run: label, correlate, cross-validate, rank, report.

use crate::dataset::{
    available_features, label_by_quartiles, label_with_thresholds, to_feature_matrix, LabeledDataset, RawDataset,
};
use crate::error::Error;
use crate::ml::{evaluate_all, ClassifierKind, ClassifierSpec, EvalReport};
use crate::model::{ClassRecord, FeatureMatrix, MetricId};
use crate::ranking::{rank_features, RankingAlgorithm, RankingTable};
use crate::report::{self, Bundle, Manifest};
use crate::stats::{correlation_table, CorrelationReport, Population};

/// Where a run failed; the CLI maps this to its exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    Labeling,
    Training,
}

#[derive(Debug, thiserror::Error)]
#[error("{source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

fn at(stage: Stage) -> impl FnOnce(Error) -> StageError {
    move |source| StageError { stage, source }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Replaces the computed quartiles when set.
    pub thresholds: Option<(f64, f64)>,
    pub classifiers: Vec<ClassifierSpec>,
    pub k: usize,
    pub algorithms: Vec<RankingAlgorithm>,
    pub population: Population,
    pub correlation_threshold: f64,
    /// `None` selects every independent variable present in all records.
    pub features: Option<Vec<MetricId>>,
    /// Rows in the ranking tables.
    pub top: usize,
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        PipelineConfig {
            seed,
            thresholds: None,
            classifiers: ClassifierKind::ALL
                .into_iter()
                .map(ClassifierSpec::default_for)
                .collect(),
            k: 10,
            algorithms: RankingAlgorithm::ALL.to_vec(),
            population: Population::Raw,
            correlation_threshold: 0.5,
            features: None,
            top: 10,
        }
    }

    /// Parameter echo for the run manifest.
    pub fn describe(&self, m: &mut Manifest) {
        m.push("seed", self.seed);
        m.push("folds", self.k);
        m.push("population", self.population.as_str());
        m.push("correlation_threshold", self.correlation_threshold);
        m.push("averaging", "weighted");
        m.push("auc", "pooled");
        for spec in &self.classifiers {
            m.push(format!("classifier.{}", spec.kind()), spec.to_json());
        }
        m.push(
            "ranking",
            self.algorithms.iter().map(|a| a.short()).collect::<Vec<_>>().join(","),
        );
        m.push("ranking_top", self.top);
    }
}

pub fn label(data: &RawDataset, thresholds: Option<(f64, f64)>) -> Result<LabeledDataset, Error> {
    match thresholds {
        Some((q1, q3)) => label_with_thresholds(&data.records, q1, q3),
        None => label_by_quartiles(data),
    }
}

pub fn feature_matrix(labeled: &LabeledDataset, features: Option<&[MetricId]>) -> Result<FeatureMatrix, Error> {
    let records: Vec<ClassRecord> = labeled.records.iter().map(|(r, _)| r.clone()).collect();
    let features = match features {
        Some(f) => f.to_vec(),
        None => available_features(&records),
    };
    if features.is_empty() {
        return Err(Error::InvalidValue("no features selected".into()));
    }
    to_feature_matrix(labeled, &features)
}

/// Records what the input and labeling looked like.
pub fn describe_data(m: &mut Manifest, data: &RawDataset, dataset_sha256: &str, labeled: &LabeledDataset) {
    let [non, eff] = labeled.label_counts();
    m.push("dataset", &data.provenance);
    m.push("dataset_sha256", dataset_sha256);
    m.push("records_ingested", data.records.len());
    m.push("records_labeled", labeled.len());
    m.push("records_discarded", labeled.discarded_count);
    m.push("labeled_effective", eff);
    m.push("labeled_non_effective", non);
    m.push("q1", labeled.q1_threshold);
    m.push("q3", labeled.q3_threshold);
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub labeled: LabeledDataset,
    pub correlations: CorrelationReport,
    pub evaluation: EvalReport,
    pub rankings: Vec<RankingTable>,
    pub bundle: Bundle,
}

pub fn run_pipeline(
    data: &RawDataset,
    dataset_sha256: &str,
    config: &PipelineConfig,
) -> Result<PipelineResult, StageError> {
    if data.records.is_empty() {
        return Err(at(Stage::Input)(Error::EmptyDataset));
    }
    let labeled = label(data, config.thresholds).map_err(at(Stage::Labeling))?;
    let population: Vec<ClassRecord> = match config.population {
        Population::Raw => data.records.clone(),
        Population::Labeled => labeled.records.iter().map(|(r, _)| r.clone()).collect(),
    };
    let correlations = correlation_table(
        &population,
        MetricId::MutationScore,
        config.correlation_threshold,
        config.population,
    )
    .map_err(at(Stage::Input))?;
    let matrix = feature_matrix(&labeled, config.features.as_deref()).map_err(at(Stage::Input))?;
    let evaluation = evaluate_all(&matrix, &config.classifiers, config.k, config.seed).map_err(at(Stage::Training))?;
    let rankings = config
        .algorithms
        .iter()
        .map(|&a| rank_features(&matrix, a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(at(Stage::Input))?;

    let mut manifest = Manifest::new();
    manifest.push("tool", concat!("testlens ", env!("CARGO_PKG_VERSION")));
    describe_data(&mut manifest, data, dataset_sha256, &labeled);
    manifest.push(
        "thresholds_source",
        if config.thresholds.is_some() {
            "override"
        } else {
            "quartiles"
        },
    );
    manifest.push(
        "features",
        matrix
            .feature_ids()
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(","),
    );
    config.describe(&mut manifest);
    let hash = manifest.sha256();

    let mut bundle = Bundle::new(manifest);
    bundle.add("correlations.csv", report::correlations_csv(&correlations, &hash));
    bundle.add(
        "correlations_full.csv",
        report::correlations_full_csv(&correlations, &hash),
    );
    bundle.add("correlations.md", report::correlations_md(&correlations, &hash));
    bundle.add("classification.csv", report::classification_csv(&evaluation, &hash));
    bundle.add("classification.md", report::classification_md(&evaluation, &hash));
    bundle.add("ranking.csv", report::ranking_csv(&rankings, config.top, &hash));
    bundle.add("ranking.md", report::ranking_md(&rankings, config.top, &hash));

    Ok(PipelineResult {
        labeled,
        correlations,
        evaluation,
        rankings,
        bundle,
    })
}
