use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steelclust_core::density::{dbscan, optics, optics_extract, optics_in, optics_scan};
use steelclust_core::{AttributeSpec, ClusterAssignment, Dataset, DistanceSpace, Instance, Label, Value};

/// Points scattered around a few random centers plus uniform background.
fn random_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=50);
    let centers: Vec<(f64, f64)> = (0..rng.random_range(1..4))
        .map(|_| (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
        .collect();
    let rows = (0..n)
        .map(|_| {
            let (x, y) = if rng.random_bool(0.8) {
                let c = centers[rng.random_range(0..centers.len())];
                (c.0 + rng.random_range(-1.0..1.0), c.1 + rng.random_range(-1.0..1.0))
            } else {
                (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))
            };
            Instance::new(vec![Value::Numeric(x), Value::Numeric(y), Value::Nominal(rng.random_range(0..2))])
        })
        .collect();
    Dataset::new(
        vec![
            AttributeSpec::numeric("x", ""),
            AttributeSpec::numeric("y", ""),
            AttributeSpec::nominal("tag", vec!["a".into(), "b".into()]),
        ],
        rows,
        None,
    )
    .unwrap()
}

/// Core points, union-find over ε-linked cores, then each border point goes
/// to the linked cluster whose smallest core index is lowest.
fn oracle(d: &Dataset, eps: f64, min_points: usize) -> Vec<Label> {
    let n = d.len();
    let space = DistanceSpace::for_dataset(d);
    let within: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| space.distance(d.row(i), d.row(j)) <= eps).collect())
        .collect();
    let core: Vec<bool> = (0..n).map(|i| within[i].iter().filter(|&&w| w).count() >= min_points).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] == x {
            x
        } else {
            let r = root(p, p[x]);
            p[x] = r;
            r
        }
    }
    for i in 0..n {
        for j in 0..n {
            if core[i] && core[j] && within[i][j] {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    // with unions toward the smaller index, a component's root is its smallest core
    (0..n)
        .map(|i| {
            if core[i] {
                Label::Cluster(root(&mut parent, i))
            } else {
                (0..n)
                    .filter(|&j| core[j] && within[i][j])
                    .map(|j| root(&mut parent, j))
                    .min()
                    .map_or(Label::Noise, Label::Cluster)
            }
        })
        .collect()
}

fn canonical(labels: Vec<Label>) -> Vec<Label> {
    let mut map = std::collections::HashMap::new();
    labels
        .into_iter()
        .map(|l| match l {
            Label::Cluster(c) => {
                let next = map.len();
                Label::Cluster(*map.entry(c).or_insert(next))
            }
            other => other,
        })
        .collect()
}

#[test]
fn dbscan_matches_transitive_closure_oracle() {
    let start = std::time::Instant::now();
    for seed in 0..100u64 {
        let d = random_dataset(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdb5c);
        let eps = rng.random_range(0.02..0.4);
        let min_points = rng.random_range(1..7);
        let got = dbscan(&d, eps, min_points).unwrap();
        assert_eq!(
            got.canonical().labels(),
            canonical(oracle(&d, eps, min_points)).as_slice(),
            "seed {seed} eps {eps} min_points {min_points}"
        );
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn optics_extraction_equals_dbscan() {
    for seed in 0..20u64 {
        let d = random_dataset(1000 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let min_points = rng.random_range(2..6);
        let o = optics(&d, 0.5, min_points).unwrap();
        for eps in [0.05, 0.15, 0.3] {
            let want = dbscan(&d, eps, min_points).unwrap().canonical();
            let got = optics_extract(&o, eps).unwrap();
            assert_eq!(got.labels(), want.labels(), "seed {seed} eps {eps}");
        }
    }
}

#[test]
fn scan_alone_recovers_core_points() {
    for seed in 0..20u64 {
        let d = random_dataset(2000 + seed);
        let o = optics(&d, 0.5, 3).unwrap();
        let space = DistanceSpace::for_dataset(&d);
        for eps in [0.1, 0.2] {
            let scanned = optics_scan(&o, eps).unwrap();
            let want = oracle(&d, eps, 3);
            let core: Vec<usize> = (0..d.len())
                .filter(|&i| (0..d.len()).filter(|&j| space.distance(d.row(i), d.row(j)) <= eps).count() >= 3)
                .collect();
            let pick = |l: &[Label]| canonical(core.iter().map(|&i| l[i]).collect());
            assert_eq!(pick(&scanned), pick(&want), "seed {seed} eps {eps}");
        }
    }
}

#[test]
fn core_points_are_never_noise_and_noise_shrinks_with_eps() {
    for seed in 0..30u64 {
        let d = random_dataset(3000 + seed);
        let mut prev = usize::MAX;
        for eps in [0.02, 0.05, 0.1, 0.2, 0.4, 0.8] {
            let a = dbscan(&d, eps, 4).unwrap();
            let noise = a.count_of(Label::Noise);
            assert!(noise <= prev);
            prev = noise;
            let o = oracle(&d, eps, 4);
            let space = DistanceSpace::for_dataset(&d);
            for i in 0..d.len() {
                let nb = (0..d.len()).filter(|&j| space.distance(d.row(i), d.row(j)) <= eps).count();
                if nb >= 4 {
                    assert_ne!(a.labels()[i], Label::Noise);
                    assert_ne!(o[i], Label::Noise);
                }
            }
        }
    }
}

/// Every row carries its own product and customer codes, so any two rows
/// differ on at least the nominal attributes.
fn unique_codes(n: usize) -> Dataset {
    let codes = |p: &str| (0..n).map(|i| format!("{p}{i:05}")).collect::<Vec<_>>();
    Dataset::new(
        vec![
            AttributeSpec::nominal("Product_CD", codes("P")),
            AttributeSpec::nominal("Customer_CD", codes("C")),
            AttributeSpec::numeric("Sales_value", "INR"),
        ],
        (0..n)
            .map(|i| Instance::new(vec![Value::Nominal(i), Value::Nominal(i), Value::Numeric((i * 37 % 101) as f64)]))
            .collect(),
        None,
    )
    .unwrap()
}

#[test]
fn unique_codes_give_all_noise_and_all_undefined() {
    let d = unique_codes(60);
    let space = DistanceSpace::for_dataset(&d);
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            assert!(space.distance(d.row(i), d.row(j)) > 0.9);
        }
    }
    let a = dbscan(&d, 0.9, 6).unwrap();
    assert_eq!(a.count_of(Label::Noise), d.len());
    let o = optics(&d, 0.9, 6).unwrap();
    assert_eq!(o.undefined_fraction(), 1.0);
    assert!(o.core_distance.iter().all(Option::is_none));
    assert!(o.to_plot_data().lines().skip(1).all(|l| l.ends_with(",UNDEFINED")));
}

#[test]
fn hand_traced_sequence_and_valleys() {
    let d = Dataset::new(
        vec![AttributeSpec::numeric("x", "")],
        [0.0, 1.0, 2.0, 10.0, 11.0, 12.0]
            .iter()
            .map(|&x| Instance::new(vec![Value::Numeric(x)]))
            .collect(),
        None,
    )
    .unwrap();
    let o = optics_in(&d, &DistanceSpace::raw(&d), f64::INFINITY, 2).unwrap();
    assert_eq!(o.reachability, vec![None, Some(1.0), Some(1.0), Some(8.0), Some(1.0), Some(1.0)]);
    let within = o.reachability[1..3].iter().chain(&o.reachability[4..]).map(|r| r.unwrap());
    assert!(within.fold(0.0, f64::max) < o.reachability[3].unwrap());
    let a = optics_extract(&o, 1.5).unwrap();
    assert_eq!(a, ClusterAssignment::from_indices(&[0, 0, 0, 1, 1, 1]).unwrap());
}

