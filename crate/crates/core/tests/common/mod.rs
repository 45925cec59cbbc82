#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use testlens::model::MetricId;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn parse_value(s: &str) -> f64 {
    match s.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => s.parse().unwrap(),
    }
}

pub struct ExpectedRow {
    pub class_id: String,
    pub test_id: String,
    pub metrics: BTreeMap<MetricId, f64>,
}

/// Reads a hand-written expectation table; cells may be fractions like `2/3`.
pub fn load_expected(path: &Path) -> Vec<ExpectedRow> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), header.len(), "{line}");
            let metrics = header[2..]
                .iter()
                .zip(&cells[2..])
                .map(|(h, c)| (h.parse::<MetricId>().unwrap(), parse_value(c)))
                .collect();
            ExpectedRow {
                class_id: cells[0].to_string(),
                test_id: cells[1].to_string(),
                metrics,
            }
        })
        .collect()
}

/// Differences between extracted records and expectations, one line each.
pub fn compare_records(records: &[testlens::model::ClassRecord], expected: &[ExpectedRow]) -> Vec<String> {
    let mut diffs = Vec::new();
    if records.len() != expected.len() {
        diffs.push(format!("{} records, expected {}", records.len(), expected.len()));
    }
    for exp in expected {
        let Some(rec) = records.iter().find(|r| r.class_id == exp.class_id) else {
            diffs.push(format!("{} missing", exp.class_id));
            continue;
        };
        if rec.test_id != exp.test_id {
            diffs.push(format!("{}: test {} != {}", exp.class_id, rec.test_id, exp.test_id));
        }
        for (metric, want) in &exp.metrics {
            let got = rec.get(*metric);
            let ok = match got {
                Some(g) if metric.value_kind() == testlens::model::ValueKind::Count => g == *want,
                Some(g) => (g - want).abs() <= 1e-9,
                None => false,
            };
            if !ok {
                diffs.push(format!("{} {}: got {:?}, expected {}", exp.class_id, metric, got, want));
            }
        }
    }
    diffs
}
