use proptest::prelude::*;
use testlens::dataset::{
    compute_quartiles, ingest_csv, label_by_quartiles, label_with_thresholds, write_records_csv, IngestOptions,
    RawDataset,
};
use testlens::model::{ClassRecord, EffectivenessLabel, MetricId};

fn raw(scores: &[f64]) -> RawDataset {
    RawDataset {
        records: scores
            .iter()
            .enumerate()
            .map(|(i, &m)| ClassRecord::new(format!("p.C{i}"), format!("p.C{i}Test")).with(MetricId::MutationScore, m))
            .collect(),
        columns: vec![MetricId::MutationScore],
        provenance: "generated".into(),
    }
}

/// Scores on a coarse grid, as real mutation scores are, so ties are common.
fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![(0u32..=20).prop_map(|k| f64::from(k) / 20.0), 0.0f64..=1.0],
        4..200,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn labeling_invariants(m in scores()) {
        let data = raw(&m);
        let (q1, q3) = compute_quartiles(&m).unwrap();
        match label_by_quartiles(&data) {
            Ok(labeled) => {
                prop_assert_eq!((labeled.q1_threshold, labeled.q3_threshold), (q1, q3));
                prop_assert_eq!(labeled.len() + labeled.discarded_count, m.len());
                for (r, l) in &labeled.records {
                    let s = r.mutation_score().unwrap();
                    prop_assert!(!(q1 < s && s < q3));
                    prop_assert_eq!(*l == EffectivenessLabel::Effective, s >= q3);
                }
                let again = label_with_thresholds(
                    &labeled.records.iter().map(|(r, _)| r.clone()).collect::<Vec<_>>(),
                    q1,
                    q3,
                )
                .unwrap();
                prop_assert_eq!(&again.records, &labeled.records);
                prop_assert_eq!(again.discarded_count, 0);
            }
            Err(testlens::Error::DegenerateSplit { .. }) => prop_assert_eq!(q1, q3),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn quartiles_are_order_free(mut m in scores()) {
        let q = compute_quartiles(&m).unwrap();
        m.reverse();
        prop_assert_eq!(compute_quartiles(&m).unwrap(), q);
        prop_assert!(q.0 <= q.1);
    }

    #[test]
    fn csv_round_trip(values in prop::collection::vec((0u32..500, 0.0f64..=1.0, 0.0f64..=2.0), 1..30)) {
        let records: Vec<ClassRecord> = values
            .iter()
            .enumerate()
            .map(|(i, &(loc, cam, lcom3))| {
                ClassRecord::new(format!("a.C{i}"), format!("a.C{i}Test"))
                    .with(MetricId::Loc, f64::from(loc))
                    .with(MetricId::Cam, cam)
                    .with(MetricId::Lcom3, lcom3)
            })
            .collect();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &records, None).unwrap();
        let back = ingest_csv(&buf[..], "mem", &IngestOptions::lenient()).unwrap();
        prop_assert_eq!(back.records, records.clone());
        let json = serde_json::to_string(&records).unwrap();
        prop_assert_eq!(serde_json::from_str::<Vec<ClassRecord>>(&json).unwrap(), records);
    }
}
