//! Bottom-up merging with single, complete or average linkage.

use std::fmt;
use std::str::FromStr;

use crate::assignment::{ClusterAssignment, Label};
use crate::data::{Dataset, DistanceSpace};
use crate::error::{Error, Result};
use crate::format::sig9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::InvalidParameter(format!("unknown linkage '{other}'"))),
        }
    }
}

/// One merge. Node ids below `n` are instances; id `n + i` is the cluster
/// formed by merge `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub linkage: Linkage,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Flat clustering after the first `n - k` merges. Clusters are
    /// numbered by their smallest instance index.
    pub fn cut(&self, k: usize) -> Result<ClusterAssignment> {
        if self.n == 0 && k == 0 {
            return ClusterAssignment::new(Vec::new());
        }
        if k < 1 || k > self.n {
            return Err(Error::InvalidParameter(format!(
                "cannot cut {} instances into {k} clusters",
                self.n
            )));
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        // representative instance of every node id
        let mut rep: Vec<usize> = (0..self.n).collect();
        for m in &self.merges[..self.n - k] {
            let (a, b) = (find(&mut parent, rep[m.left]), find(&mut parent, rep[m.right]));
            let (lo, hi) = (a.min(b), a.max(b));
            parent[hi] = lo;
            rep.push(lo);
        }
        let mut ids = vec![usize::MAX; self.n];
        let mut next = 0;
        let labels = (0..self.n)
            .map(|i| {
                let r = find(&mut parent, i);
                if ids[r] == usize::MAX {
                    ids[r] = next;
                    next += 1;
                }
                Label::Cluster(ids[r])
            })
            .collect();
        ClusterAssignment::new(labels)
    }

    /// `left,right,height` lines with a header.
    pub fn to_text(&self) -> String {
        let mut out = format!("# steelclust dendrogram\n# linkage={} n={}\nleft,right,height\n", self.linkage, self.n);
        for m in &self.merges {
            out.push_str(&format!("{},{},{}\n", m.left, m.right, sig9(m.height)));
        }
        out
    }
}

pub fn agglomerative(d: &Dataset, linkage: Linkage, target_k: usize) -> Result<(Dendrogram, ClusterAssignment)> {
    agglomerative_in(d, &DistanceSpace::for_dataset(d), linkage, target_k)
}

/// Builds the full dendrogram under `space`, then cuts it at `target_k`.
/// Ties between equally close pairs go to the lexicographically smallest
/// pair of cluster slots, where a cluster's slot is its smallest instance.
pub fn agglomerative_in(
    d: &Dataset,
    space: &DistanceSpace,
    linkage: Linkage,
    target_k: usize,
) -> Result<(Dendrogram, ClusterAssignment)> {
    let n = d.len();
    if target_k < 1 || target_k > n {
        return Err(Error::InvalidParameter(format!(
            "target_k = {target_k} must lie in 1..={n}"
        )));
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = space.distance(d.row(i), d.row(j));
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    // node id currently held by each slot
    let mut node = (0..n).collect::<Vec<_>>();
    let nearest = |i: usize, active: &[bool], dist: &[f64]| -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if j != i && active[j] && best.is_none_or(|b| dist[i * n + j] < dist[i * n + b]) {
                best = Some(j);
            }
        }
        best
    };
    let mut nn: Vec<Option<usize>> = (0..n).map(|i| nearest(i, &active, &dist)).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if let Some(j) = nn[i] {
                let cand = (dist[i * n + j], i.min(j), i.max(j));
                if best.is_none_or(|b| cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2) < (b.1, b.2))) {
                    best = Some(cand);
                }
            }
        }
        let (h, a, b) = best.expect("at least two active clusters");
        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let (da, db) = (dist[a * n + k], dist[b * n + k]);
            let v = match linkage {
                Linkage::Single => da.min(db),
                Linkage::Complete => da.max(db),
                Linkage::Average => (sa * da + sb * db) / (sa + sb),
            };
            dist[a * n + k] = v;
            dist[k * n + a] = v;
        }
        active[b] = false;
        size[a] += size[b];
        merges.push(Merge {
            left: node[a],
            right: node[b],
            height: h,
            size: size[a],
        });
        node[a] = n + merges.len() - 1;
        for k in 0..n {
            if !active[k] {
                continue;
            }
            if k == a || nn[k] == Some(a) || nn[k] == Some(b) {
                nn[k] = nearest(k, &active, &dist);
            } else if let Some(c) = nn[k] {
                let v = dist[k * n + a];
                if v < dist[k * n + c] || (v == dist[k * n + c] && a < c) {
                    nn[k] = Some(a);
                }
            }
        }
    }
    let dendro = Dendrogram { n, linkage, merges };
    let assignment = dendro.cut(target_k)?;
    Ok((dendro, assignment))
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

    #[test]
    fn hand_traced_single_linkage() {
        let d = one_d(&[0.0, 1.0, 10.0]);
        let (dg, a) = agglomerative_in(&d, &DistanceSpace::raw(&d), Linkage::Single, 2).unwrap();
        let heights: Vec<f64> = dg.merges.iter().map(|m| m.height).collect();
        assert_eq!(heights, vec![1.0, 9.0]);
        assert_eq!(a.labels(), ClusterAssignment::from_indices(&[0, 0, 1]).unwrap().labels());
        assert_eq!(dg.to_text().lines().nth(3), Some("0,1,1"));
        assert_eq!(dg.to_text().lines().nth(4), Some("3,2,9"));
    }

    #[test]
    fn extreme_cuts() {
        let d = one_d(&[0.0, 4.0, 5.0, 9.0]);
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let (dg, all) = agglomerative(&d, linkage, 4).unwrap();
            assert_eq!(all.counts(), vec![1; 4]);
            let one = dg.cut(1).unwrap();
            assert_eq!(one.counts(), vec![4]);
            let max = dg.merges.iter().map(|m| m.height).fold(0.0, f64::max);
            assert_eq!(dg.merges.last().unwrap().height, max);
        }
        assert!(agglomerative(&d, Linkage::Single, 0).is_err());
        assert!(agglomerative(&d, Linkage::Single, 5).is_err());
    }

    #[test]
    fn complete_and_average_heights() {
        let d = one_d(&[0.0, 1.0, 3.0]);
        let raw = DistanceSpace::raw(&d);
        let (c, _) = agglomerative_in(&d, &raw, Linkage::Complete, 1).unwrap();
        assert_eq!(c.merges[1].height, 3.0);
        let (a, _) = agglomerative_in(&d, &raw, Linkage::Average, 1).unwrap();
        assert_eq!(a.merges[1].height, 2.5);
    }

    #[test]
    fn ties_take_smallest_pair() {
        let d = one_d(&[0.0, 1.0, 2.0, 3.0]);
        let (dg, _) = agglomerative_in(&d, &DistanceSpace::raw(&d), Linkage::Single, 1).unwrap();
        assert_eq!((dg.merges[0].left, dg.merges[0].right), (0, 1));
        assert_eq!((dg.merges[1].left, dg.merges[1].right), (4, 2));
    }

    #[test]
    fn linkage_names_round_trip() {
        for l in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            assert_eq!(l.to_string().parse::<Linkage>().unwrap(), l);
        }
        assert!("ward".parse::<Linkage>().is_err());
    }
}
