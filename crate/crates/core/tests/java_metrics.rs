mod common;

use testlens::java::extract::{extract_from_paths, extract_records, parse_corpus, read_java_sources, ExtractOptions};
use testlens::model::{validate_record, MetricId};

fn acme_records() -> Vec<testlens::model::ClassRecord> {
    let root = common::fixtures().join("java/acme/src");
    extract_from_paths(&[root], &[], None).unwrap_or_else(|e| panic!("{e:?}"))
}

#[test]
fn acme_corpus_matches_hand_counts() {
    let expected = common::load_expected(&common::fixtures().join("java/acme/expected.csv"));
    assert!(expected.len() >= 12);
    let diffs = common::compare_records(&acme_records(), &expected);
    assert!(diffs.is_empty(), "{}", diffs.join("\n"));
}

#[test]
fn extracted_records_satisfy_invariants() {
    for r in acme_records() {
        assert_eq!(validate_record(&r), Ok(()), "{}", r.class_id);
        let wmc = r.get(MetricId::Wmc).unwrap();
        let amc = r.get(MetricId::Amc).unwrap();
        let methods = if amc == 0.0 { 0.0 } else { (wmc / amc).round() };
        assert!(wmc >= methods);
        assert!(r.get(MetricId::Rfc).unwrap() >= methods);
        assert_eq!(
            r.get(MetricId::Nmc).unwrap(),
            r.get(MetricId::Nmci).unwrap() + r.get(MetricId::Nmce).unwrap()
        );
        assert!(r.get(MetricId::Nbi).is_none());
    }
}

#[test]
fn extraction_is_deterministic_and_order_independent() {
    let root = common::fixtures().join("java/acme/src");
    let mut files = read_java_sources(&[&root]).unwrap();
    let a = extract_records(parse_corpus(&files).unwrap(), &ExtractOptions::default()).unwrap();
    files.reverse();
    let b = extract_records(parse_corpus(&files).unwrap(), &ExtractOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn nbi_joins_from_class_files() {
    let src = common::fixtures().join("java/nbi/src");
    let classes = common::fixtures().join("classfiles");
    let records = extract_from_paths(std::slice::from_ref(&src), &[classes], None).unwrap_or_else(|e| panic!("{e:?}"));
    let text = std::fs::read_to_string(common::fixtures().join("java/nbi/expected_nbi.csv")).unwrap();
    let expected: Vec<(String, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (c, n) = l.split_once(',').unwrap();
            (c.to_string(), n.parse().unwrap())
        })
        .collect();
    let got: Vec<(String, f64)> = records
        .iter()
        .map(|r| (r.class_id.clone(), r.get(MetricId::Nbi).unwrap()))
        .collect();
    assert_eq!(got, expected);

    // A class file directory lacking one of the paired classes is an input error.
    let partial = tempfile::tempdir().unwrap();
    std::fs::copy(
        common::fixtures().join("classfiles/Simple.class"),
        partial.path().join("Simple.class"),
    )
    .unwrap();
    assert!(extract_from_paths(&[src], &[partial.path().to_path_buf()], None).is_err());
}

#[test]
fn malformed_source_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("A.java"), "class A {\n  void m( {\n}\n").unwrap();
    std::fs::write(dir.path().join("ATest.java"), "class ATest {}\n").unwrap();
    let errors = extract_from_paths(&[dir.path().to_path_buf()], &[], None).unwrap_err();
    assert_eq!(errors.len(), 1);
    let msg = errors[0].to_string();
    assert!(msg.contains("A.java:2:"), "{msg}");
}
