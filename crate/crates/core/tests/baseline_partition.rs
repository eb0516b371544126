use std::time::Instant;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steelclust_core::baseline::{regression_metrics, zero_r_fit};
use steelclust_core::data::{generate_sales_dataset, GeneratorConfig};
use steelclust_core::evaluation::{cluster_summary, wcss};
use steelclust_core::partition::{farthest_first, kmeans, kmeans_from_rows, DEFAULT_MAX_ITER};
use steelclust_core::{compute_ranges, AttributeSpec, ClusterAssignment, Dataset, Instance, Value};

fn numeric_attrs(d: &Dataset) -> Vec<usize> {
    d.active_attributes().into_iter().filter(|&a| d.schema()[a].is_numeric()).collect()
}

#[test]
fn zero_r_on_training_data_is_the_baseline() {
    let start = Instant::now();
    let d = generate_sales_dataset(&GeneratorConfig::table5(1000, 0, 1)).unwrap();
    for a in numeric_attrs(&d) {
        let m = zero_r_fit(&d, a).unwrap();
        let p = vec![m.numeric_prediction().unwrap(); d.len()];
        let r = regression_metrics(&p, &d.numeric_column(a)).unwrap();
        assert!((r.relative_absolute_error_pct - 100.0).abs() < 1e-9, "{r:?}");
        assert!((r.root_relative_squared_error_pct - 100.0).abs() < 1e-9, "{r:?}");
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

fn random_mixed(rng: &mut ChaCha8Rng, max_n: usize) -> Dataset {
    let n = rng.random_range(1..=max_n);
    let rows = (0..n)
        .map(|_| {
            Instance::new(vec![
                Value::Numeric(rng.random_range(-1e3..1e3)),
                Value::Numeric(rng.random_range(0.0f64..1.0).powi(3) * 1e7),
                Value::Nominal(rng.random_range(0..3)),
            ])
        })
        .collect();
    Dataset::new(
        vec![
            AttributeSpec::numeric("x", ""),
            AttributeSpec::numeric("v", "INR"),
            AttributeSpec::nominal("c", vec!["a".into(), "b".into(), "c".into()]),
        ],
        rows,
        None,
    )
    .unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_r_matches_summary_full_data(seed in any::<u64>()) {
        let d = random_mixed(&mut ChaCha8Rng::seed_from_u64(seed), 80);
        let one = ClusterAssignment::from_indices(&vec![0; d.len()]).unwrap();
        let s = cluster_summary(&one, &d).unwrap();
        for (j, &a) in d.active_attributes().iter().enumerate() {
            if let Some(full) = s.full_mean(j) {
                let z = zero_r_fit(&d, a).unwrap().numeric_prediction().unwrap();
                prop_assert!(rel_close(z, full, 1e-9), "{z} vs {full}");
            }
        }
    }

    #[test]
    fn kmeans_cluster_means_reweight_to_the_overall_mean(seed in any::<u64>(), k in 1usize..6) {
        let d = random_mixed(&mut ChaCha8Rng::seed_from_u64(seed), 120);
        prop_assume!(k <= d.len());
        let (_, a) = kmeans(&d, k, seed, DEFAULT_MAX_ITER).unwrap();
        let s = cluster_summary(&a, &d).unwrap();
        let n = d.len() as f64;
        for (j, &attr) in d.active_attributes().iter().enumerate() {
            if !d.schema()[attr].is_numeric() {
                continue;
            }
            let direct = d.numeric_column(attr).iter().sum::<f64>() / n;
            let weighted: f64 = s.columns[1..]
                .iter()
                .map(|c| match c.attributes[j] {
                    steelclust_core::evaluation::AttributeSummary::Numeric { mean, .. } => c.count as f64 * mean,
                    _ => unreachable!(),
                })
                .sum();
            let scale = d.numeric_column(attr).iter().map(|x| x.abs()).sum::<f64>() / n;
            prop_assert!((weighted / n - direct).abs() <= 1e-9 * scale.max(1e-300));
        }
    }
}

#[test]
fn kmeans_wcss_never_increases() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..100 {
        let d = random_mixed(&mut rng, 200);
        let k = rng.random_range(1..=d.len().min(6));
        let (m, a) = kmeans(&d, k, trial, DEFAULT_MAX_ITER).unwrap();
        for w in m.wcss_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "trial {trial}: {:?}", m.wcss_history);
        }
        let recomputed = wcss(&a, &d, &compute_ranges(&d)).unwrap();
        assert!((recomputed - m.wcss).abs() <= 1e-9 * m.wcss.max(1.0));
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn four_points_reach_the_brute_force_optimum() {
    let d = Dataset::new(
        vec![AttributeSpec::numeric("x", "")],
        [0.0, 1.0, 9.0, 10.0].iter().map(|&x| Instance::new(vec![Value::Numeric(x)])).collect(),
        None,
    )
    .unwrap();
    let (m, a) = kmeans_from_rows(&d, &[0, 2], DEFAULT_MAX_ITER).unwrap();
    assert!((m.wcss - 0.01).abs() < 1e-12);
    let ranges = compute_ranges(&d);
    let best = (1u32..15)
        .map(|mask| {
            let labels: Vec<usize> = (0..4).map(|i| ((mask >> i) & 1) as usize).collect();
            wcss(&ClusterAssignment::from_indices(&labels).unwrap(), &d, &ranges).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!((best - 0.01).abs() < 1e-12);
    assert!((wcss(&a, &d, &ranges).unwrap() - best).abs() < 1e-12);
}

#[test]
fn farthest_first_isolates_two_outliers() {
    let d = generate_sales_dataset(&GeneratorConfig::table5(1000, 2, 3)).unwrap();
    let (_, a) = farthest_first(&d, 2, 42).unwrap();
    let labels: Vec<usize> = a.labels().iter().map(|l| l.cluster().unwrap()).collect();
    let in_zero = labels.iter().filter(|&&c| c == 0).count();
    assert_eq!(in_zero, 998);
    assert!(in_zero as f64 / d.len() as f64 >= 0.99);
    assert_eq!(&labels[998..], &[1, 1]);
}
