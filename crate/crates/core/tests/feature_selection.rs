use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steelclust_core::feature_selection::{best_first_search, search, CfsEvaluator};
use steelclust_core::{AttributeSpec, Dataset, Instance, Value};

/// f1 takes five equally frequent levels, the class is f1's level, f2 copies
/// f1 and f3 is uniform noise.
fn informative_duplicate_noise(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<String> = (0..5).map(|l| format!("L{l}")).collect();
    let rows = (0..n)
        .map(|i| {
            let level = i % 5;
            let f1 = level as f64 * 10.0;
            Instance::new(vec![
                Value::Numeric(f1),
                Value::Numeric(f1),
                Value::Numeric(rng.random_range(0.0..100.0)),
                Value::Nominal(level),
            ])
        })
        .collect();
    Dataset::new(
        vec![
            AttributeSpec::numeric("f1", ""),
            AttributeSpec::numeric("f2", ""),
            AttributeSpec::numeric("f3", ""),
            AttributeSpec::nominal("class", levels),
        ],
        rows,
        Some(3),
    )
    .unwrap()
}

fn exhaustive(eval: &CfsEvaluator) -> (f64, Vec<Vec<usize>>) {
    let cands = eval.candidates();
    let mut best = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    for mask in 1u32..(1 << cands.len()) {
        let subset: Vec<usize> = (0..cands.len()).filter(|b| mask & (1 << b) != 0).map(|b| cands[b]).collect();
        let m = eval.merit(&subset).unwrap();
        if m > best + 1e-12 {
            best = m;
            argmax = vec![subset];
        } else if (m - best).abs() <= 1e-12 {
            argmax.push(subset);
        }
    }
    (best, argmax)
}

#[test]
fn selects_only_the_informative_attribute() {
    let d = informative_duplicate_noise(200, 9);
    let eval = CfsEvaluator::new(&d, 3, None).unwrap();
    let r = best_first_search(&d, 3, None, None).unwrap();
    assert_eq!(r.selected, vec![0]);
    assert!((r.merit - 1.0).abs() < 1e-12);
    let (best, argmax) = exhaustive(&eval);
    assert!((r.merit - best).abs() < 1e-12);
    // {f1} and {f1, f2} tie at merit 1; the smaller subset wins
    let smallest = argmax.iter().map(Vec::len).min().unwrap();
    let smallest_sets: Vec<&Vec<usize>> = argmax.iter().filter(|s| s.len() == smallest).collect();
    assert!(smallest_sets.contains(&&r.selected));
    assert!(eval.merit(&[2]).unwrap() < 0.2);
    assert!(r.report(&d).contains("f1"));
}

fn random_discrete(rows: &[Vec<u8>], class: &[u8]) -> Dataset {
    let m = rows[0].len();
    let mut schema: Vec<AttributeSpec> = (0..m).map(|j| AttributeSpec::numeric(format!("a{j}"), "")).collect();
    schema.push(AttributeSpec::nominal("class", vec!["p".into(), "q".into(), "r".into()]));
    let data = rows
        .iter()
        .zip(class)
        .map(|(r, &c)| {
            let mut v: Vec<Value> = r.iter().map(|&x| Value::Numeric(x as f64)).collect();
            v.push(Value::Nominal(c as usize));
            Instance::new(v)
        })
        .collect();
    Dataset::new(schema, data, Some(m)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn unbounded_search_reaches_the_exhaustive_maximum(
        (rows, class) in (1usize..7).prop_flat_map(|m| {
            (20usize..60).prop_flat_map(move |n| (
                prop::collection::vec(prop::collection::vec(0u8..4, m), n),
                prop::collection::vec(0u8..3, n),
            ))
        }),
    ) {
        let d = random_discrete(&rows, &class);
        let eval = CfsEvaluator::new(&d, d.n_attributes() - 1, None).unwrap();
        let r = search(&eval, None).unwrap();
        let (best, _) = exhaustive(&eval);
        if best > 0.0 {
            prop_assert!((r.merit - best).abs() < 1e-12, "search {} exhaustive {}", r.merit, best);
        }
        // a bounded search never beats the exhaustive maximum
        let bounded = search(&eval, Some(1)).unwrap();
        prop_assert!(bounded.merit <= best + 1e-12);
    }
}
