mod common;

use median_core::exact::{approximation_ratio, brute_force_median, cost};
use median_core::generate::{format_matrix, parse_matrix, DEFAULT_MATRIX_CAP};
use median_core::{generate_metric, validate_metric, MetricFamily, MetricOracle, PointId};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = MetricFamily> {
    prop_oneof![
        (1usize..200).prop_map(|n| MetricFamily::Discrete { n }),
        (1usize..120, 1usize..11).prop_map(|(n, dim)| MetricFamily::EuclideanUniform { n, dim }),
        (1usize..120, 1usize..6, 1usize..6, 0.0f64..0.3).prop_map(|(n, dim, clusters, spread)| {
            MetricFamily::EuclideanClustered {
                n,
                dim,
                clusters,
                spread,
            }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_families_are_metrics(fam in family(), seed in any::<u64>()) {
        let o = generate_metric(&fam, seed).unwrap();
        let v = validate_metric(&o).unwrap();
        prop_assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn generation_is_reproducible(fam in family(), seed in any::<u64>()) {
        let a = generate_metric(&fam, seed).unwrap();
        let b = generate_metric(&fam, seed).unwrap();
        prop_assert_eq!(a.backing(), b.backing());
    }

    #[test]
    fn query_count_matches_calls(k in 0usize..300, seed in any::<u64>()) {
        let o = generate_metric(&MetricFamily::EuclideanUniform { n: 17, dim: 3 }, seed).unwrap();
        for i in 0..k {
            o.query(PointId::new(i % 17 + 1), PointId::new((i * 7) % 17 + 1)).unwrap();
        }
        prop_assert_eq!(o.query_count(), k as u64);
    }

    #[test]
    fn ratio_at_least_one_and_cost_deterministic(seed in any::<u64>(), n in 1usize..60, pick in any::<prop::sample::Index>()) {
        let o = generate_metric(&MetricFamily::EuclideanUniform { n, dim: 2 }, seed).unwrap();
        let p = PointId::from_zero_based(pick.index(n));
        prop_assert!(approximation_ratio(&o, p).unwrap().ratio >= 1.0);
        prop_assert_eq!(cost(&o, p).unwrap(), cost(&o, p).unwrap());
        let before = o.query_count();
        brute_force_median(&o);
        prop_assert!(o.query_count() - before <= (n * (n - 1)) as u64);
    }

    #[test]
    fn matrix_text_round_trips(fam in family(), seed in any::<u64>()) {
        let o = generate_metric(&fam, seed).unwrap();
        let text = format_matrix(&o);
        let back = parse_matrix(&text, DEFAULT_MATRIX_CAP).unwrap();
        prop_assert_eq!(back.to_matrix(), o.to_matrix());
    }
}

#[test]
fn cost_matches_raw_row_sums() {
    let o = generate_metric(&MetricFamily::EuclideanUniform { n: 50, dim: 2 }, 7).unwrap();
    let raw = o.to_matrix();
    let sums = common::row_sums(50, &raw);
    for (i, want) in sums.iter().enumerate() {
        let got = cost(&o, PointId::from_zero_based(i)).unwrap();
        assert!(common::rel_err(got, *want) < 1e-12, "row {i}");
    }
}

#[test]
fn brute_force_matches_full_scan() {
    let o = generate_metric(&MetricFamily::EuclideanUniform { n: 100, dim: 2 }, 42).unwrap();
    let raw = o.clone().to_matrix();
    let sums = common::row_sums(100, &raw);
    let best = brute_force_median(&o);
    assert_eq!(best.point, PointId::from_zero_based(common::argmin(&sums)));
    assert!(common::rel_err(best.cost, sums[common::argmin(&sums)]) < 1e-12);
}

#[test]
fn exact_median_ratio_is_one() {
    let o = generate_metric(
        &MetricFamily::EuclideanClustered {
            n: 80,
            dim: 3,
            clusters: 3,
            spread: 0.1,
        },
        3,
    )
    .unwrap();
    let best = brute_force_median(&o);
    assert_eq!(approximation_ratio(&o, best.point).unwrap().ratio, 1.0);
}

#[test]
fn explicit_line_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.txt");
    std::fs::write(&path, "3\n0 1 10\n1 0 9\n10 9 0\n").unwrap();
    let o = generate_metric(&MetricFamily::Explicit { path }, 0).unwrap();
    let best = brute_force_median(&o);
    assert_eq!((best.point, best.cost), (PointId::new(2), 10.0));
    assert!(validate_metric(&MetricOracle::clone(&o))
        .unwrap()
        .is_empty());
}
