//! Dataset ingestion, quartile labeling and feature-matrix construction.

use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{validate_record, ClassRecord, EffectivenessLabel, FeatureMatrix, MetricId};

/// Non-metric columns that ingestion drops. Matched case-insensitively.
pub const METADATA_COLUMNS: [&str; 8] = [
    "project",
    "url",
    "commit",
    "class_path",
    "test_path",
    "class_id",
    "test_id",
    "label",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub records: Vec<ClassRecord>,
    /// Metric columns in header order.
    pub columns: Vec<MetricId>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub records: Vec<(ClassRecord, EffectivenessLabel)>,
    pub q1_threshold: f64,
    pub q3_threshold: f64,
    pub discarded_count: usize,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn label_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for (_, l) in &self.records {
            counts[l.index()] += 1;
        }
        counts
    }
}

/// Which metric columns must be present in the header.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub required: Vec<MetricId>,
}

impl IngestOptions {
    /// Every independent variable except NBI (unless `require_nbi`), plus M.
    pub fn analysis(require_nbi: bool) -> Self {
        let mut required: Vec<MetricId> = MetricId::independent()
            .filter(|&m| require_nbi || m != MetricId::Nbi)
            .collect();
        required.push(MetricId::MutationScore);
        IngestOptions { required }
    }

    /// No required columns; used when reading rows for prediction.
    pub fn lenient() -> Self {
        IngestOptions::default()
    }
}

fn is_metadata(column: &str) -> bool {
    METADATA_COLUMNS.iter().any(|m| m.eq_ignore_ascii_case(column))
}

/// Reads a comma-separated dataset with a header row of canonical metric names.
///
/// Identifiers come from `class_id`/`test_id`, falling back to
/// `class_path`/`test_path`, and finally to `row-<line>`.
pub fn ingest_csv(input: impl Read, provenance: &str, options: &IngestOptions) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();

    let find = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let class_col = find("class_id").or_else(|| find("class_path"));
    let test_col = find("test_id").or_else(|| find("test_path"));

    let mut columns: Vec<(usize, MetricId)> = Vec::new();
    let mut seen = HashSet::new();
    for (i, name) in header.iter().enumerate() {
        if is_metadata(name) {
            continue;
        }
        let metric: MetricId = name.parse()?;
        if !seen.insert(metric) {
            return Err(Error::InvalidValue(format!("column `{name}` appears twice")));
        }
        columns.push((i, metric));
    }
    if let Some(m) = options.required.iter().find(|m| !seen.contains(m)) {
        return Err(Error::MissingColumn(m.name().to_string()));
    }

    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let cell = |i: Option<usize>| i.and_then(|i| row.get(i)).unwrap_or("").to_string();
        let class_id = match class_col {
            Some(_) => cell(class_col),
            None => format!("row-{line}"),
        };
        let test_id = cell(test_col);
        let mut record = ClassRecord::new(class_id, test_id);
        for &(i, metric) in &columns {
            let text = row.get(i).unwrap_or("");
            let value: f64 = text.parse().map_err(|_| Error::BadCell {
                row: line,
                column: metric.name().to_string(),
                content: text.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::BadCell {
                    row: line,
                    column: metric.name().to_string(),
                    content: text.to_string(),
                });
            }
            record.set(metric, value);
        }
        if let Err(violations) = validate_record(&record) {
            return Err(Error::InvalidRecord {
                row: line,
                class_id: record.class_id,
                violations: violations
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
        if !ids.insert((record.class_id.clone(), record.test_id.clone())) {
            return Err(Error::DuplicateRecord {
                row: line,
                class_id: record.class_id,
                test_id: record.test_id,
            });
        }
        records.push(record);
    }
    Ok(RawDataset {
        records,
        columns: columns.iter().map(|&(_, m)| m).collect(),
        provenance: provenance.to_string(),
    })
}

/// Reads a dataset file from disk.
pub fn ingest_path(path: &std::path::Path, options: &IngestOptions) -> Result<RawDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_csv(std::io::BufReader::new(file), &path.display().to_string(), options)
}

/// Value at quantile `q` of sorted data, interpolating between closest ranks.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// First and third quartiles.
pub fn compute_quartiles(scores: &[f64]) -> Result<(f64, f64)> {
    if scores.len() < 4 {
        return Err(Error::TooFewValues {
            needed: 4,
            found: scores.len(),
        });
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidValue("non-finite score".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((quantile_sorted(&sorted, 0.25), quantile_sorted(&sorted, 0.75)))
}

fn mutation_scores(records: &[ClassRecord]) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            r.mutation_score().ok_or_else(|| Error::MissingFeature {
                class_id: r.class_id.clone(),
                metric: MetricId::MutationScore,
            })
        })
        .collect()
}

/// Labels by the dataset's own mutation-score quartiles.
pub fn label_by_quartiles(data: &RawDataset) -> Result<LabeledDataset> {
    if data.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (q1, q3) = compute_quartiles(&mutation_scores(&data.records)?)?;
    label_with_thresholds(&data.records, q1, q3)
}

/// Keeps `M <= q1` as non-effective and `M >= q3` as effective; drops the rest.
pub fn label_with_thresholds(records: &[ClassRecord], q1: f64, q3: f64) -> Result<LabeledDataset> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if q1 >= q3 {
        return Err(Error::DegenerateSplit { q1, q3 });
    }
    let scores = mutation_scores(records)?;
    let mut kept = Vec::new();
    for (record, m) in records.iter().zip(scores) {
        let label = if m <= q1 {
            EffectivenessLabel::NonEffective
        } else if m >= q3 {
            EffectivenessLabel::Effective
        } else {
            continue;
        };
        kept.push((record.clone(), label));
    }
    Ok(LabeledDataset {
        discarded_count: records.len() - kept.len(),
        records: kept,
        q1_threshold: q1,
        q3_threshold: q3,
    })
}

/// Independent variables present in every record, in canonical order.
pub fn available_features(records: &[ClassRecord]) -> Vec<MetricId> {
    MetricId::independent()
        .filter(|m| records.iter().all(|r| r.metrics.contains_key(m)))
        .collect()
}

pub fn to_feature_matrix(data: &LabeledDataset, features: &[MetricId]) -> Result<FeatureMatrix> {
    if let Some(&m) = features.iter().find(|m| !m.is_independent()) {
        return Err(Error::ForbiddenFeature(m));
    }
    let mut rows = Vec::with_capacity(data.records.len());
    for (record, _) in &data.records {
        let row = features
            .iter()
            .map(|&metric| {
                record.get(metric).ok_or_else(|| Error::MissingFeature {
                    class_id: record.class_id.clone(),
                    metric,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let targets = data.records.iter().map(|(_, l)| *l).collect();
    FeatureMatrix::new(features.to_vec(), rows, targets)
}

/// Writes records as CSV: `class_id,test_id`, then every metric any record
/// carries in canonical order, then `label` when labels are given.
pub fn write_records_csv(
    out: impl Write,
    records: &[ClassRecord],
    labels: Option<&[EffectivenessLabel]>,
) -> Result<()> {
    let present: BTreeSet<MetricId> = records.iter().flat_map(|r| r.metrics.keys().copied()).collect();
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["class_id", "test_id"];
    header.extend(present.iter().map(|m| m.name()));
    if labels.is_some() {
        header.push("label");
    }
    writer.write_record(&header)?;
    for (i, record) in records.iter().enumerate() {
        let mut row = vec![record.class_id.clone(), record.test_id.clone()];
        row.extend(
            present
                .iter()
                .map(|&m| record.get(m).map(|v| v.to_string()).unwrap_or_default()),
        );
        if let Some(labels) = labels {
            row.push(labels[i].to_string());
        }
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_header() -> String {
        let mut cols = vec!["project", "url", "commit", "class_path", "test_path"];
        cols.extend(MetricId::ALL.iter().map(|m| m.name()));
        cols.join(",")
    }

    fn full_row(class: &str, m: &str) -> String {
        let mut cells = vec![
            "p".to_string(),
            "u".into(),
            "c".into(),
            class.into(),
            format!("{class}Test"),
        ];
        for metric in MetricId::ALL {
            cells.push(match metric {
                MetricId::MutationScore => m.to_string(),
                MetricId::Nmc => "3".into(),
                MetricId::Nmci => "1".into(),
                MetricId::Nmce => "2".into(),
                _ => "0".into(),
            });
        }
        cells.join(",")
    }

    #[test]
    fn ingest_drops_metadata() {
        let text = [
            full_header(),
            full_row("a.A", "0.1"),
            full_row("a.B", "0.5"),
            full_row("a.C", "1"),
        ]
        .join("\n");
        let data = ingest_csv(text.as_bytes(), "mem", &IngestOptions::analysis(true)).unwrap();
        assert_eq!(data.records.len(), 3);
        assert_eq!(data.records[0].class_id, "a.A");
        assert_eq!(data.records[0].test_id, "a.ATest");
        assert_eq!(data.records[0].metrics.len(), 37);
        assert_eq!(data.records[2].mutation_score(), Some(1.0));
    }

    #[test]
    fn bad_cell_names_row() {
        let text = [full_header(), full_row("a.A", "0.1"), full_row("a.B", "n/a")].join("\n");
        match ingest_csv(text.as_bytes(), "mem", &IngestOptions::analysis(true)) {
            Err(Error::BadCell { row, column, content }) => {
                assert_eq!((row, column.as_str(), content.as_str()), (3, "M", "n/a"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_column_and_duplicates() {
        let text = "class_id,test_id,LOC\na,b,1\n";
        assert!(matches!(
            ingest_csv(text.as_bytes(), "mem", &IngestOptions::analysis(false)),
            Err(Error::MissingColumn(_))
        ));
        let text = "class_id,test_id,LOC\na,b,1\na,b,2\n";
        assert!(matches!(
            ingest_csv(text.as_bytes(), "mem", &IngestOptions::lenient()),
            Err(Error::DuplicateRecord { row: 3, .. })
        ));
        let text = "class_id,LOC,FOO\na,1,2\n";
        assert!(matches!(
            ingest_csv(text.as_bytes(), "mem", &IngestOptions::lenient()),
            Err(Error::UnknownMetric(_))
        ));
    }

    #[test]
    fn invalid_record_rejected() {
        let text = "class_id,test_id,DAM\na,b,1.3\n";
        assert!(matches!(
            ingest_csv(text.as_bytes(), "mem", &IngestOptions::lenient()),
            Err(Error::InvalidRecord { row: 2, .. })
        ));
    }

    #[test]
    fn quartile_examples() {
        assert_eq!(compute_quartiles(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap(), (1.0, 3.0));
        assert_eq!(compute_quartiles(&[1.0, 2.0, 3.0, 4.0]).unwrap(), (1.75, 3.25));
        assert_eq!(compute_quartiles(&[4.0, 3.0, 2.0, 1.0]).unwrap(), (1.75, 3.25));
        assert!(matches!(
            compute_quartiles(&[1.0, 2.0, 3.0]),
            Err(Error::TooFewValues { .. })
        ));
    }

    fn with_m(id: &str, m: f64) -> ClassRecord {
        ClassRecord::new(id, format!("{id}Test")).with(MetricId::MutationScore, m)
    }

    #[test]
    fn threshold_boundaries() {
        let records = vec![with_m("a", 0.4), with_m("b", 0.7), with_m("c", 1.0), with_m("d", 0.2)];
        let labeled = label_with_thresholds(&records, 0.4, 1.0).unwrap();
        let got: Vec<_> = labeled.records.iter().map(|(r, l)| (r.class_id.as_str(), *l)).collect();
        assert_eq!(
            got,
            [
                ("a", EffectivenessLabel::NonEffective),
                ("c", EffectivenessLabel::Effective),
                ("d", EffectivenessLabel::NonEffective)
            ]
        );
        assert_eq!(labeled.discarded_count, 1);
    }

    #[test]
    fn degenerate_split() {
        let records: Vec<_> = (0..8).map(|i| with_m(&format!("c{i}"), 1.0)).collect();
        let raw = RawDataset {
            records,
            columns: vec![MetricId::MutationScore],
            provenance: String::new(),
        };
        assert!(matches!(label_by_quartiles(&raw), Err(Error::DegenerateSplit { .. })));
    }

    #[test]
    fn feature_matrix_guards() {
        let labeled = LabeledDataset {
            records: vec![
                (
                    with_m("a", 0.0).with(MetricId::Loc, 3.0).with(MetricId::Wmc, 1.0),
                    EffectivenessLabel::NonEffective,
                ),
                (
                    with_m("b", 1.0).with(MetricId::Loc, 9.0).with(MetricId::Wmc, 4.0),
                    EffectivenessLabel::Effective,
                ),
            ],
            q1_threshold: 0.0,
            q3_threshold: 1.0,
            discarded_count: 0,
        };
        assert!(matches!(
            to_feature_matrix(&labeled, &[MetricId::Loc, MetricId::MutationScore]),
            Err(Error::ForbiddenFeature(MetricId::MutationScore))
        ));
        let m = to_feature_matrix(&labeled, &[MetricId::Loc, MetricId::Wmc]).unwrap();
        assert_eq!(m.rows(), &[vec![3.0, 1.0], vec![9.0, 4.0]]);
        assert_eq!(
            m.targets(),
            &[EffectivenessLabel::NonEffective, EffectivenessLabel::Effective]
        );
        assert!(matches!(
            to_feature_matrix(&labeled, &[MetricId::Nbi]),
            Err(Error::MissingFeature { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            ClassRecord::new("a.A", "a.ATest")
                .with(MetricId::Loc, 12.0)
                .with(MetricId::Cam, 7.0 / 9.0),
            ClassRecord::new("a.B", "a.BTest")
                .with(MetricId::Loc, 3.0)
                .with(MetricId::Cam, 0.1),
        ];
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &records, None).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("class_id,test_id,LOC,CAM\na.A,a.ATest,12,"));
        let back = ingest_csv(&buf[..], "mem", &IngestOptions::lenient()).unwrap();
        assert_eq!(back.records, records);
    }
}
