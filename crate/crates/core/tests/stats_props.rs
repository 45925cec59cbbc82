use proptest::prelude::*;
use testlens::stats::{average_ranks, spearman};

/// Rank of each value by direct counting: 1 + #smaller + (#equal - 1) / 2.
fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let less = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let (mx, my) = (sx / n, sy / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

/// Small integer alphabet so ties are frequent.
fn tied_seq() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..=100).prop_flat_map(|n| {
        let cell = prop_oneof![
            (0i32..6).prop_map(f64::from),
            (-1000i32..1000).prop_map(|v| f64::from(v) / 7.0)
        ];
        (prop::collection::vec(cell.clone(), n), prop::collection::vec(cell, n))
    })
}

fn distinct(v: &[f64]) -> bool {
    v.iter().any(|&a| a != v[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_rank_pearson_oracle((x, y) in tied_seq()) {
        prop_assume!(distinct(&x) && distinct(&y));
        prop_assert_eq!(average_ranks(&x), brute_ranks(&x));
        let rho = spearman(&x, &y).unwrap();
        let oracle = brute_pearson(&brute_ranks(&x), &brute_ranks(&y));
        prop_assert!((rho - oracle).abs() <= 1e-12, "{} vs {}", rho, oracle);
        prop_assert!((-1.0..=1.0).contains(&rho));
    }

    #[test]
    fn symmetric((x, y) in tied_seq()) {
        prop_assume!(distinct(&x) && distinct(&y));
        prop_assert_eq!(spearman(&x, &y).unwrap(), spearman(&y, &x).unwrap());
    }

    #[test]
    fn invariant_under_increasing_maps((x, y) in tied_seq(), a in 0.1f64..5.0, b in -10.0f64..10.0) {
        prop_assume!(distinct(&x) && distinct(&y));
        let fx: Vec<f64> = x.iter().map(|v| (a * v + b).exp().min(f64::MAX)).collect();
        prop_assume!(fx.iter().all(|v| v.is_finite()) && distinct(&fx));
        // exp may merge nearby values; only compare when the order structure survives
        prop_assume!(average_ranks(&fx) == average_ranks(&x));
        prop_assert_eq!(spearman(&fx, &y).unwrap(), spearman(&x, &y).unwrap());
    }

    #[test]
    fn negation_gives_minus_one(x in prop::collection::vec(-1e6f64..1e6, 3..50)) {
        prop_assume!(distinct(&x));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((spearman(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
    }
}
