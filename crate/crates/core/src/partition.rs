//! K-means, farthest-first traversal and the density-wrapping metaclusterer.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::assignment::{ClusterAssignment, Label};
use crate::baseline::argmax_first;
use crate::data::{Dataset, DistanceSpace, Instance, Value};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::mixture::{posterior, render_components, Component, NominalEstimator};
use crate::rng::{stream, Stream};

pub const DEFAULT_MAX_ITER: usize = 100;

/// Which partitioner produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionAlgorithm {
    KMeans,
    FarthestFirst,
}

impl PartitionAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            PartitionAlgorithm::KMeans => "kmeans",
            PartitionAlgorithm::FarthestFirst => "farthest-first",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionModel {
    pub algorithm: PartitionAlgorithm,
    pub k: usize,
    /// Numeric means and nominal modes of the final clusters (every
    /// attribute, class included).
    pub centroids: Vec<Instance>,
    pub space: DistanceSpace,
    pub iterations_run: usize,
    /// Sum of squared distances to the own cluster's centroid.
    pub wcss: f64,
    /// WCSS after each centroid update (k-means only).
    pub wcss_history: Vec<f64>,
    /// Rows chosen as traversal centers (farthest-first only).
    pub centers: Vec<usize>,
}

impl PartitionModel {
    /// Index of the nearest centroid, ties to the lowest index.
    pub fn nearest(&self, x: &Instance) -> usize {
        nearest(&self.space, &self.centroids, x)
    }

    /// Assigns (possibly unseen) instances to their nearest centroid.
    pub fn predict(&self, d: &Dataset) -> Vec<usize> {
        d.rows().iter().map(|x| self.nearest(x)).collect()
    }

    pub fn to_text(&self, d: &Dataset) -> String {
        let mut out = format!(
            "# steelclust partition model\nversion=1\nalgorithm={}\nk={}\niterations_run={}\nwcss={}\n",
            self.algorithm.name(),
            self.k,
            self.iterations_run,
            sig9(self.wcss)
        );
        if !self.centers.is_empty() {
            let c: Vec<String> = self.centers.iter().map(usize::to_string).collect();
            out.push_str(&format!("center_rows={}\n", c.join(",")));
        }
        for (k, c) in self.centroids.iter().enumerate() {
            out.push_str(&format!("[centroid {k}]\n"));
            for (a, &v) in c.values.iter().enumerate() {
                let text = match v {
                    Value::Numeric(x) => sig9(x),
                    Value::Nominal(_) => d.render_value(a, v),
                };
                out.push_str(&format!("{}={}\n", d.schema()[a].name, text));
            }
        }
        out
    }
}

fn nearest(space: &DistanceSpace, centroids: &[Instance], x: &Instance) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let dist = space.squared(x, centroid);
        if dist < best_d {
            best_d = dist;
            best = c;
        }
    }
    best
}

/// Per-cluster centroids (numeric mean, nominal mode with ties to domain
/// order) over every attribute. `None` for clusters without members.
/// Reductions run in row order.
pub fn compute_centroids(d: &Dataset, labels: &[usize], k: usize) -> Vec<Option<Instance>> {
    let m = d.n_attributes();
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    (0..k)
        .map(|c| {
            if counts[c] == 0 {
                return None;
            }
            let values = (0..m)
                .map(|a| match d.schema()[a].domain() {
                    None => {
                        let mut sum = 0.0;
                        for (row, &l) in d.rows().iter().zip(labels) {
                            if l == c {
                                sum += row.numeric(a);
                            }
                        }
                        Value::Numeric(sum / counts[c] as f64)
                    }
                    Some(domain) => {
                        let mut sym = vec![0usize; domain.len()];
                        for (row, &l) in d.rows().iter().zip(labels) {
                            if l == c {
                                sym[row.nominal(a)] += 1;
                            }
                        }
                        Value::Nominal(argmax_first(&sym))
                    }
                })
                .collect();
            Some(Instance::new(values))
        })
        .collect()
}

fn wcss_of(d: &Dataset, space: &DistanceSpace, centroids: &[Instance], labels: &[usize]) -> f64 {
    d.rows()
        .iter()
        .zip(labels)
        .map(|(x, &l)| space.squared(x, &centroids[l]))
        .sum()
}

fn check_k(d: &Dataset, k: usize) -> Result<()> {
    if k < 1 || k > d.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={} (number of instances)",
            d.len()
        )));
    }
    Ok(())
}

/// `k` seeded-random rows with pairwise distinct active values where the
/// data allows it.
fn random_initial_rows(d: &Dataset, space: &DistanceSpace, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.shuffle(&mut stream(seed, Stream::KMeansInit));
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for &i in &order {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|&c| space.squared(d.row(c), d.row(i)) > 0.0) {
            chosen.push(i);
        }
    }
    for &i in &order {
        if chosen.len() == k {
            break;
        }
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen
}

/// Lloyd's k-means from `k` seeded-random distinct rows.
pub fn kmeans(d: &Dataset, k: usize, seed: u64, max_iter: usize) -> Result<(PartitionModel, ClusterAssignment)> {
    check_k(d, k)?;
    let space = DistanceSpace::for_dataset(d);
    let init = random_initial_rows(d, &space, k, seed);
    kmeans_in_space(d, space, &init, max_iter)
}

/// K-means starting from the given rows as centroids.
pub fn kmeans_from_rows(d: &Dataset, initial_rows: &[usize], max_iter: usize) -> Result<(PartitionModel, ClusterAssignment)> {
    check_k(d, initial_rows.len())?;
    if let Some(&bad) = initial_rows.iter().find(|&&r| r >= d.len()) {
        return Err(Error::InvalidParameter(format!("initial row {bad} out of range")));
    }
    kmeans_in_space(d, DistanceSpace::for_dataset(d), initial_rows, max_iter)
}

fn kmeans_in_space(
    d: &Dataset,
    space: DistanceSpace,
    initial_rows: &[usize],
    max_iter: usize,
) -> Result<(PartitionModel, ClusterAssignment)> {
    if max_iter < 1 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let k = initial_rows.len();
    let n = d.len();
    let mut centroids: Vec<Instance> = initial_rows.iter().map(|&r| d.row(r).clone()).collect();
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    for iter in 0..max_iter {
        iterations = iter + 1;
        let mut changed = false;
        for (i, x) in d.rows().iter().enumerate() {
            let c = nearest(&space, &centroids, x);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        reseed_empty(d, &space, &centroids, &mut labels, k);
        centroids = compute_centroids(d, &labels, k)
            .into_iter()
            .map(|c| c.expect("no empty clusters after reseeding"))
            .collect();
        history.push(wcss_of(d, &space, &centroids, &labels));
    }

    let wcss = wcss_of(d, &space, &centroids, &labels);
    let assignment = ClusterAssignment::from_indices(&labels)?;
    Ok((
        PartitionModel {
            algorithm: PartitionAlgorithm::KMeans,
            k,
            centroids,
            space,
            iterations_run: iterations,
            wcss,
            wcss_history: history,
            centers: Vec::new(),
        },
        assignment,
    ))
}

/// Gives every empty cluster the instance farthest from its current
/// centroid, taken from clusters that keep at least one member.
fn reseed_empty(d: &Dataset, space: &DistanceSpace, centroids: &[Instance], labels: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    let mut moved = vec![false; labels.len()];
    for e in 0..k {
        if counts[e] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, x) in d.rows().iter().enumerate() {
            let l = labels[i];
            if moved[i] || counts[l] <= 1 {
                continue;
            }
            let dist = space.squared(x, &centroids[l]);
            if best.is_none_or(|(_, bd)| dist > bd) {
                best = Some((i, dist));
            }
        }
        if let Some((i, _)) = best {
            counts[labels[i]] -= 1;
            labels[i] = e;
            counts[e] = 1;
            moved[i] = true;
        }
    }
}

/// Farthest-first traversal: a seeded-random first center, then repeatedly
/// the row farthest from its nearest chosen center (ties to the lowest row).
pub fn farthest_first(d: &Dataset, k: usize, seed: u64) -> Result<(PartitionModel, ClusterAssignment)> {
    check_k(d, k)?;
    let first = stream(seed, Stream::FarthestFirst).random_range(0..d.len());
    farthest_first_from(d, k, first)
}

/// Farthest-first traversal from a fixed first center.
pub fn farthest_first_from(d: &Dataset, k: usize, first: usize) -> Result<(PartitionModel, ClusterAssignment)> {
    check_k(d, k)?;
    if first >= d.len() {
        return Err(Error::InvalidParameter(format!("first center {first} out of range")));
    }
    let space = DistanceSpace::for_dataset(d);
    let n = d.len();
    let mut centers = vec![first];
    let mut is_center = vec![false; n];
    is_center[first] = true;
    let mut min_d: Vec<f64> = d.rows().iter().map(|x| space.squared(x, d.row(first))).collect();
    while centers.len() < k {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if is_center[i] {
                continue;
            }
            if best.is_none_or(|b| min_d[i] > min_d[b]) {
                best = Some(i);
            }
        }
        let next = best.expect("k <= n leaves a candidate");
        centers.push(next);
        is_center[next] = true;
        for (i, x) in d.rows().iter().enumerate() {
            min_d[i] = min_d[i].min(space.squared(x, d.row(next)));
        }
    }
    let center_rows: Vec<Instance> = centers.iter().map(|&r| d.row(r).clone()).collect();
    let mut labels: Vec<usize> = d.rows().iter().map(|x| nearest(&space, &center_rows, x)).collect();
    // a center always belongs to its own cluster, even when duplicated
    for (c, &r) in centers.iter().enumerate() {
        labels[r] = c;
    }
    let centroids: Vec<Instance> = compute_centroids(d, &labels, k)
        .into_iter()
        .map(|c| c.expect("every cluster holds its center"))
        .collect();
    let wcss = wcss_of(d, &space, &centroids, &labels);
    let assignment = ClusterAssignment::from_indices(&labels)?;
    Ok((
        PartitionModel {
            algorithm: PartitionAlgorithm::FarthestFirst,
            k,
            centroids,
            space,
            iterations_run: 1,
            wcss,
            wcss_history: Vec::new(),
            centers,
        },
        assignment,
    ))
}

/// A partition turned into a probabilistic model: cluster-fraction priors,
/// one normal per numeric attribute and an add-one smoothed discrete
/// distribution per nominal attribute, per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    pub base: PartitionModel,
    pub components: Vec<Component>,
    pub counts: Vec<usize>,
}

impl DensityModel {
    pub fn priors(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.prior).collect()
    }

    /// Posterior cluster probabilities of `x`.
    pub fn membership(&self, x: &Instance) -> Vec<f64> {
        posterior(&self.components, x).1
    }

    /// Log of the mixture density at `x`.
    pub fn log_density(&self, x: &Instance) -> f64 {
        posterior(&self.components, x).0
    }

    pub fn to_text(&self, d: &Dataset) -> String {
        format!(
            "{}# density\n{}",
            self.base.to_text(d),
            render_components(d, &self.components, Some(&self.counts))
        )
    }
}

pub fn density_wrap(base: &PartitionModel, assignment: &ClusterAssignment, d: &Dataset) -> Result<DensityModel> {
    if assignment.len() != d.len() {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: d.len(),
        });
    }
    let mut counts = vec![0usize; base.k];
    for l in assignment.labels() {
        match l {
            Label::Cluster(c) if *c < base.k => counts[*c] += 1,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "label {other} inconsistent with a {}-cluster partition",
                    base.k
                )))
            }
        }
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyCluster(empty));
    }
    let n = d.len() as f64;
    let ranges = base.space.ranges();
    let components = (0..base.k)
        .map(|c| {
            let weights: Vec<f64> = assignment
                .labels()
                .iter()
                .map(|l| if *l == Label::Cluster(c) { 1.0 } else { 0.0 })
                .collect();
            Component::estimate(d, base.space.active(), &weights, counts[c] as f64 / n, ranges, NominalEstimator::Laplace(1.0))
        })
        .collect();
    Ok(DensityModel {
        base: base.clone(),
        components,
        counts,
    })
}
