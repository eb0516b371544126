//! Correlation-based feature subset selection.
//!
//! Feature/class and feature/feature correlations are symmetric
//! uncertainties over discretized columns; numeric attributes are binned
//! by equal frequency. Subsets are scored with the CFS merit and searched
//! forward best-first from the empty set.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_STALE_LIMIT: usize = 5;

/// Default bin count for `n` values: `min(10, ceil(sqrt(n)))`.
pub fn default_bins(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, 10)
}

/// Equal-frequency bin codes. Tied values share a bin.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let bins = bins.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut codes = vec![0; n];
    let mut first_pos = 0;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && values[i] != values[order[pos - 1]] {
            first_pos = pos;
        }
        codes[i] = first_pos * bins / n;
    }
    codes
}

/// Discrete codes for an attribute column.
pub fn discretize(d: &Dataset, attr: usize, bins: usize) -> Vec<usize> {
    if d.schema()[attr].is_numeric() {
        equal_frequency_bins(&d.numeric_column(attr), bins)
    } else {
        d.nominal_column(attr)
    }
}

/// Entropy in bits. Counts are summed in sorted order, so the result depends
/// only on the multiset of counts.
fn entropy_of_counts(mut counts: Vec<usize>, n: usize) -> f64 {
    counts.sort_unstable();
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn run_counts<T: Ord + Clone>(mut xs: Vec<T>) -> Vec<usize> {
    xs.sort_unstable();
    let mut counts = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        let mut j = i + 1;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        counts.push(j - i);
        i = j;
    }
    counts
}

pub fn entropy(x: &[usize]) -> f64 {
    entropy_of_counts(run_counts(x.to_vec()), x.len())
}

pub fn joint_entropy(x: &[usize], y: &[usize]) -> f64 {
    let pairs: Vec<(usize, usize)> = x.iter().copied().zip(y.iter().copied()).collect();
    entropy_of_counts(run_counts(pairs), x.len())
}

/// `2 * (H(X) + H(Y) - H(X,Y)) / (H(X) + H(Y))`, 0 when both are constant.
pub fn symmetric_uncertainty(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hx = entropy(x);
    let hy = entropy(y);
    let denom = hx + hy;
    if denom == 0.0 {
        return Ok(0.0);
    }
    let hxy = joint_entropy(x, y);
    Ok((2.0 * (hx + hy - hxy) / denom).clamp(0.0, 1.0))
}

/// Precomputed discretization and correlation cache for one dataset/class.
pub struct CfsEvaluator {
    class_attr: usize,
    n_attributes: usize,
    class_su: Vec<f64>,
    // feature-feature SU, dense n_attributes x n_attributes
    pair_su: Vec<f64>,
}

impl CfsEvaluator {
    /// `bins = None` uses [`default_bins`].
    pub fn new(d: &Dataset, class_attr: usize, bins: Option<usize>) -> Result<Self> {
        if class_attr >= d.n_attributes() {
            return Err(Error::InvalidParameter(format!("class attribute {class_attr} out of range")));
        }
        if d.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let bins = bins.unwrap_or_else(|| default_bins(d.len()));
        let m = d.n_attributes();
        let columns: Vec<Vec<usize>> = (0..m).map(|a| discretize(d, a, bins)).collect();
        let mut class_su = vec![0.0; m];
        let mut pair_su = vec![0.0; m * m];
        for a in 0..m {
            if a == class_attr {
                continue;
            }
            class_su[a] = symmetric_uncertainty(&columns[a], &columns[class_attr])?;
            for b in (a + 1)..m {
                if b == class_attr {
                    continue;
                }
                let su = symmetric_uncertainty(&columns[a], &columns[b])?;
                pair_su[a * m + b] = su;
                pair_su[b * m + a] = su;
            }
        }
        Ok(CfsEvaluator {
            class_attr,
            n_attributes: m,
            class_su,
            pair_su,
        })
    }

    pub fn candidates(&self) -> Vec<usize> {
        (0..self.n_attributes).filter(|&a| a != self.class_attr).collect()
    }

    pub fn merit(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::InvalidParameter("empty feature subset".into()));
        }
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.iter().any(|&a| a == self.class_attr || a >= self.n_attributes) {
            return Err(Error::InvalidParameter(format!("invalid feature subset {subset:?}")));
        }
        let k = s.len() as f64;
        let r_cf = s.iter().map(|&a| self.class_su[a]).sum::<f64>() / k;
        let mut pair_sum = 0.0;
        let mut pairs = 0usize;
        for (i, &a) in s.iter().enumerate() {
            for &b in &s[i + 1..] {
                pair_sum += self.pair_su[a * self.n_attributes + b];
                pairs += 1;
            }
        }
        let r_ff = if pairs == 0 { 0.0 } else { pair_sum / pairs as f64 };
        Ok(k * r_cf / (k + k * (k - 1.0) * r_ff).sqrt())
    }
}

/// CFS merit of `subset` for predicting `class_attr`.
pub fn cfs_merit(subset: &[usize], d: &Dataset, class_attr: usize, bins: Option<usize>) -> Result<f64> {
    CfsEvaluator::new(d, class_attr, bins)?.merit(subset)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Ascending attribute positions.
    pub selected: Vec<usize>,
    pub merit: f64,
    pub subsets_evaluated: usize,
}

impl SelectionResult {
    pub fn report(&self, d: &Dataset) -> String {
        let names: Vec<&str> = self.selected.iter().map(|&a| d.schema()[a].name.as_str()).collect();
        format!(
            "selected_attributes={}\nmerit={:.6}\nsubsets_evaluated={}\n",
            names.join(","),
            self.merit,
            self.subsets_evaluated
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Scored {
    merit: f64,
    subset: Vec<usize>,
}

impl Scored {
    /// Greater is better: higher merit, then smaller, then lexicographically smaller.
    fn rank(&self, other: &Self) -> Ordering {
        self.merit
            .total_cmp(&other.merit)
            .then_with(|| other.subset.len().cmp(&self.subset.len()))
            .then_with(|| other.subset.cmp(&self.subset))
    }
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank(other)
    }
}

/// Forward best-first search. `stale_limit = None` never gives up, which
/// visits the whole subset lattice.
pub fn best_first_search(
    d: &Dataset,
    class_attr: usize,
    stale_limit: Option<usize>,
    bins: Option<usize>,
) -> Result<SelectionResult> {
    let eval = CfsEvaluator::new(d, class_attr, bins)?;
    search(&eval, stale_limit)
}

pub fn search(eval: &CfsEvaluator, stale_limit: Option<usize>) -> Result<SelectionResult> {
    let candidates = eval.candidates();
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate attributes".into()));
    }
    let limit = stale_limit.unwrap_or(usize::MAX).max(1);
    let mut open = BinaryHeap::new();
    open.push(Scored {
        merit: 0.0,
        subset: Vec::new(),
    });
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(Vec::new());
    let mut best: Option<Scored> = None;
    let mut evaluated = 0usize;
    let mut stale = 0usize;

    while let Some(node) = open.pop() {
        let best_merit_before = best.as_ref().map(|b| b.merit);
        for &a in &candidates {
            if node.subset.binary_search(&a).is_ok() {
                continue;
            }
            let mut child = node.subset.clone();
            child.push(a);
            child.sort_unstable();
            if !visited.insert(child.clone()) {
                continue;
            }
            let scored = Scored {
                merit: eval.merit(&child)?,
                subset: child,
            };
            evaluated += 1;
            if best.as_ref().is_none_or(|b| scored.rank(b) == Ordering::Greater) {
                best = Some(scored.clone());
            }
            open.push(scored);
        }
        let improved = match (best_merit_before, best.as_ref()) {
            (None, Some(_)) => true,
            (Some(before), Some(b)) => b.merit > before,
            _ => false,
        };
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale >= limit {
                break;
            }
        }
    }
    let best = best.expect("at least one candidate was evaluated");
    Ok(SelectionResult {
        selected: best.subset,
        merit: best.merit,
        subsets_evaluated: evaluated,
    })
}
