//! Density-based clustering: DBSCAN and OPTICS.
//!
//! Neighborhoods are computed by direct pairwise distance and always
//! include the query point, so a point is core when at least `min_points`
//! instances (itself included) lie within `eps`.

use crate::assignment::{ClusterAssignment, Label};
use crate::data::{Dataset, DistanceSpace};
use crate::error::{Error, Result};
use crate::format::sig9;

fn check_params(eps: f64, min_points: usize) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if min_points < 1 {
        return Err(Error::InvalidParameter("min_points must be at least 1".into()));
    }
    Ok(())
}

/// Indices within `eps` of row `i` (itself included), ascending.
fn neighborhood(d: &Dataset, space: &DistanceSpace, i: usize, eps: f64) -> Vec<usize> {
    let x = d.row(i);
    (0..d.len())
        .filter(|&j| j == i || space.distance(x, d.row(j)) <= eps)
        .collect()
}

fn core_flags(d: &Dataset, space: &DistanceSpace, eps: f64, min_points: usize) -> Vec<bool> {
    (0..d.len())
        .map(|i| {
            let x = d.row(i);
            let mut count = 0;
            for j in 0..d.len() {
                if j == i || space.distance(x, d.row(j)) <= eps {
                    count += 1;
                    if count >= min_points {
                        return true;
                    }
                }
            }
            false
        })
        .collect()
}

/// DBSCAN on the dataset's normalized mixed-type distance.
pub fn dbscan(d: &Dataset, eps: f64, min_points: usize) -> Result<ClusterAssignment> {
    dbscan_in(d, &DistanceSpace::for_dataset(d), eps, min_points)
}

/// DBSCAN under an explicit distance space. Clusters are expanded from core
/// points in row order; a border point joins the first cluster to reach it.
pub fn dbscan_in(d: &Dataset, space: &DistanceSpace, eps: f64, min_points: usize) -> Result<ClusterAssignment> {
    check_params(eps, min_points)?;
    let is_core = core_flags(d, space, eps, min_points);
    expand(d, space, eps, &is_core)
}

/// Breadth-first expansion from the core points in row order.
fn expand(d: &Dataset, space: &DistanceSpace, eps: f64, is_core: &[bool]) -> Result<ClusterAssignment> {
    let n = d.len();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut next_cluster = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if labels[start].is_some() || !is_core[start] {
            continue;
        }
        let c = next_cluster;
        next_cluster += 1;
        labels[start] = Some(c);
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for q in neighborhood(d, space, p, eps) {
                if labels[q].is_none() {
                    labels[q] = Some(c);
                    if is_core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    ClusterAssignment::new(
        labels
            .into_iter()
            .map(|l| l.map_or(Label::Noise, Label::Cluster))
            .collect(),
    )
}

/// Cluster ordering with reachability annotations. Keeps the data it was
/// built from so that flat extractions can place border points.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticsOrdering {
    /// Processing order: a permutation of row indices.
    pub order: Vec<usize>,
    /// Reachability per position; `None` is UNDEFINED.
    pub reachability: Vec<Option<f64>>,
    /// Core distance per position; `None` is UNDEFINED.
    pub core_distance: Vec<Option<f64>>,
    pub eps: f64,
    pub min_points: usize,
    data: Dataset,
    space: DistanceSpace,
}

impl OpticsOrdering {
    /// Two-column plot data: `position,reachability` with UNDEFINED literal.
    pub fn to_plot_data(&self) -> String {
        let mut out = String::from("position,reachability\n");
        for (pos, r) in self.reachability.iter().enumerate() {
            match r {
                Some(v) => out.push_str(&format!("{pos},{}\n", sig9(*v))),
                None => out.push_str(&format!("{pos},UNDEFINED\n")),
            }
        }
        out
    }

    /// Row-indexed labels: UNDEFINED where the row has neither a
    /// reachability nor a core distance, NOISE elsewhere.
    pub fn undefined_labels(&self) -> Vec<Label> {
        let mut labels = vec![Label::Noise; self.order.len()];
        for (pos, &row) in self.order.iter().enumerate() {
            if self.reachability[pos].is_none() && self.core_distance[pos].is_none() {
                labels[row] = Label::Undefined;
            }
        }
        labels
    }

    /// Fraction of positions with UNDEFINED reachability.
    pub fn undefined_fraction(&self) -> f64 {
        if self.order.is_empty() {
            return 0.0;
        }
        self.reachability.iter().filter(|r| r.is_none()).count() as f64 / self.order.len() as f64
    }
}

pub fn optics(d: &Dataset, eps: f64, min_points: usize) -> Result<OpticsOrdering> {
    optics_in(d, &DistanceSpace::for_dataset(d), eps, min_points)
}

/// Neighbors of `i` within `eps` with their distances, by (distance, index).
fn sorted_neighbors(d: &Dataset, space: &DistanceSpace, i: usize, eps: f64) -> Vec<(usize, f64)> {
    let x = d.row(i);
    let mut nb: Vec<(usize, f64)> = (0..d.len())
        .filter_map(|j| {
            let dist = if i == j { 0.0 } else { space.distance(x, d.row(j)) };
            (dist <= eps).then_some((j, dist))
        })
        .collect();
    nb.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    nb
}

/// OPTICS under an explicit distance space. Passing `f64::INFINITY` as eps
/// makes every pair reachable.
pub fn optics_in(d: &Dataset, space: &DistanceSpace, eps: f64, min_points: usize) -> Result<OpticsOrdering> {
    check_params(eps, min_points)?;
    let n = d.len();
    let mut processed = vec![false; n];
    let mut reach: Vec<Option<f64>> = vec![None; n];
    let mut in_seeds = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut out_reach = Vec::with_capacity(n);
    let mut out_core = Vec::with_capacity(n);

    for start in 0..n {
        if processed[start] {
            continue;
        }
        let mut seeds: Vec<usize> = Vec::new();
        let mut current = Some(start);
        while let Some(p) = current {
            processed[p] = true;
            in_seeds[p] = false;
            let neighbors = sorted_neighbors(d, space, p, eps);
            let core = (neighbors.len() >= min_points).then(|| neighbors[min_points - 1].1);
            order.push(p);
            out_reach.push(reach[p]);
            out_core.push(core);
            if let Some(cd) = core {
                for &(q, dist) in &neighbors {
                    if processed[q] {
                        continue;
                    }
                    let r = cd.max(dist);
                    if reach[q].is_none_or(|old| r < old) {
                        reach[q] = Some(r);
                    }
                    if !in_seeds[q] {
                        in_seeds[q] = true;
                        seeds.push(q);
                    }
                }
            }
            // next seed: smallest reachability, ties to the lower row index
            current = None;
            let mut best_pos: Option<usize> = None;
            for (pos, &q) in seeds.iter().enumerate() {
                let better = best_pos.is_none_or(|bp| {
                    let b = seeds[bp];
                    let (rq, rb) = (reach[q].unwrap(), reach[b].unwrap());
                    rq < rb || (rq == rb && q < b)
                });
                if better {
                    best_pos = Some(pos);
                }
            }
            if let Some(bp) = best_pos {
                current = Some(seeds.swap_remove(bp));
            }
        }
    }
    Ok(OpticsOrdering {
        order,
        reachability: out_reach,
        core_distance: out_core,
        eps,
        min_points,
        data: d.clone(),
        space: space.clone(),
    })
}

/// The plain reachability scan: a position whose reachability exceeds
/// `eps_prime` (or is UNDEFINED) opens a new cluster when its core distance
/// is within `eps_prime` and is NOISE otherwise; any other position joins
/// the open cluster. Core points come out exactly as DBSCAN's; border points
/// seen before any of their cores are left as NOISE.
pub fn optics_scan(o: &OpticsOrdering, eps_prime: f64) -> Result<Vec<Label>> {
    if !(eps_prime > 0.0) {
        return Err(Error::InvalidParameter(format!("eps' must be positive, got {eps_prime}")));
    }
    if eps_prime > o.eps {
        return Err(Error::InvalidParameter(format!(
            "eps' = {eps_prime} exceeds the generating eps = {}",
            o.eps
        )));
    }
    let mut labels = vec![Label::Noise; o.order.len()];
    let mut current: Option<usize> = None;
    let mut next = 0;
    for (pos, &row) in o.order.iter().enumerate() {
        if o.reachability[pos].is_some_and(|r| r <= eps_prime) {
            labels[row] = current.map_or(Label::Noise, Label::Cluster);
        } else if o.core_distance[pos].is_some_and(|cd| cd <= eps_prime) {
            current = Some(next);
            labels[row] = Label::Cluster(next);
            next += 1;
        }
    }
    Ok(labels)
}

/// DBSCAN-equivalent flat clustering at `eps_prime`, indexed by row.
/// Core clusters come from [`optics_scan`]; every non-core point is then
/// attached to the first-discovered cluster (the one whose lowest-index core
/// is smallest) having a core within `eps_prime`, which is DBSCAN's rule.
pub fn optics_extract(o: &OpticsOrdering, eps_prime: f64) -> Result<ClusterAssignment> {
    let scanned = optics_scan(o, eps_prime)?;
    let n = o.order.len();
    let mut is_core = vec![false; n];
    for (pos, &row) in o.order.iter().enumerate() {
        is_core[row] = o.core_distance[pos].is_some_and(|cd| cd <= eps_prime);
    }
    // rank clusters by their lowest-index core
    let mut first_core = Vec::new();
    for row in 0..n {
        if let (true, Label::Cluster(c)) = (is_core[row], scanned[row]) {
            if c >= first_core.len() {
                first_core.resize(c + 1, usize::MAX);
            }
            first_core[c] = first_core[c].min(row);
        }
    }
    let mut labels = vec![Label::Noise; n];
    for row in 0..n {
        if is_core[row] {
            labels[row] = scanned[row];
            continue;
        }
        let x = o.data.row(row);
        let mut best: Option<usize> = None;
        for c in 0..n {
            if !is_core[c] || o.space.distance(x, o.data.row(c)) > eps_prime {
                continue;
            }
            let cluster = scanned[c].cluster().expect("core points are clustered");
            if best.is_none_or(|b| first_core[cluster] < first_core[b]) {
                best = Some(cluster);
            }
        }
        if let Some(b) = best {
            labels[row] = Label::Cluster(b);
        }
    }
    Ok(ClusterAssignment::new(labels)?.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSpec, Instance, Value};

    fn one_d(xs: &[f64]) -> Dataset {
        Dataset::new(
            vec![AttributeSpec::numeric("x", "")],
            xs.iter().map(|&x| Instance::new(vec![Value::Numeric(x)])).collect(),
            None,
        )
        .unwrap()
    }

    const SIX: [f64; 6] = [0.0, 1.0, 2.0, 10.0, 11.0, 12.0];

    #[test]
    fn two_groups_normalized() {
        let a = dbscan(&one_d(&SIX), 0.125, 2).unwrap();
        assert_eq!(a.labels(), ClusterAssignment::from_indices(&[0, 0, 0, 1, 1, 1]).unwrap().labels());
    }

    #[test]
    fn all_noise_and_all_in_one() {
        let d = one_d(&[0.0, 5.0, 10.0]);
        let a = dbscan(&d, 0.1, 2).unwrap();
        assert_eq!(a.count_of(Label::Noise), 3);
        let one = dbscan(&d, 1.0, 1).unwrap();
        assert_eq!(one.counts(), vec![3]);
        assert!(dbscan(&d, 0.0, 2).is_err());
        assert!(dbscan(&d, 1.0, 0).is_err());
    }

    #[test]
    fn hand_traced_reachability() {
        let d = one_d(&SIX);
        let o = optics_in(&d, &DistanceSpace::raw(&d), f64::INFINITY, 2).unwrap();
        assert_eq!(o.order, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(
            o.reachability,
            vec![None, Some(1.0), Some(1.0), Some(8.0), Some(1.0), Some(1.0)]
        );
        let a = optics_extract(&o, 1.5).unwrap();
        assert_eq!(a.counts(), vec![3, 3]);
        assert!(o.to_plot_data().starts_with("position,reachability\n0,UNDEFINED\n1,1\n"));
    }

    #[test]
    fn single_instance_ordering() {
        let o = optics(&one_d(&[3.0]), 0.5, 2).unwrap();
        assert_eq!(o.order, vec![0]);
        assert_eq!(o.reachability, vec![None]);
        assert_eq!(o.core_distance, vec![None]);
        assert_eq!(o.undefined_labels(), vec![Label::Undefined]);
    }

    #[test]
    fn extraction_edges() {
        let d = one_d(&SIX);
        let o = optics_in(&d, &DistanceSpace::raw(&d), 20.0, 2).unwrap();
        assert_eq!(optics_extract(&o, 0.5).unwrap().count_of(Label::Noise), 6);
        assert_eq!(optics_extract(&o, 20.0).unwrap().counts(), vec![6]);
        assert!(optics_extract(&o, 21.0).is_err());
    }
}
