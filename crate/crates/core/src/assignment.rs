use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Per-instance clustering outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Cluster(usize),
    Noise,
    Undefined,
}

impl Label {
    pub fn cluster(self) -> Option<usize> {
        match self {
            Label::Cluster(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Cluster(c) => write!(f, "{c}"),
            Label::Noise => f.write_str("NOISE"),
            Label::Undefined => f.write_str("UNDEFINED"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "NOISE" => Ok(Label::Noise),
            "UNDEFINED" => Ok(Label::Undefined),
            _ => s
                .parse()
                .map(Label::Cluster)
                .map_err(|_| Error::Parse(format!("bad cluster label `{s}`"))),
        }
    }
}

/// Labels for every instance of a dataset, cluster indices contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<Label>,
    k: usize,
}

impl ClusterAssignment {
    /// Checks that cluster indices form `0..k` with no gaps.
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        let k = labels.iter().filter_map(|l| l.cluster()).max().map_or(0, |m| m + 1);
        let mut used = vec![false; k];
        for l in &labels {
            if let Label::Cluster(c) = l {
                used[*c] = true;
            }
        }
        if let Some(gap) = used.iter().position(|u| !u) {
            return Err(Error::InvalidParameter(format!(
                "cluster indices not contiguous: {gap} unused"
            )));
        }
        Ok(ClusterAssignment { labels, k })
    }

    /// Labels for a model with `k` clusters, some of which may be empty.
    pub fn with_k(labels: Vec<Label>, k: usize) -> Result<Self> {
        if let Some(bad) = labels.iter().filter_map(|l| l.cluster()).find(|&c| c >= k) {
            return Err(Error::InvalidParameter(format!("cluster {bad} out of range for k = {k}")));
        }
        Ok(ClusterAssignment { labels, k })
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&c| Label::Cluster(c)).collect())
    }

    /// Renumbers clusters by first appearance, leaving NOISE/UNDEFINED alone.
    pub fn canonical(&self) -> ClusterAssignment {
        let mut map: Vec<Option<usize>> = vec![None; self.n_clusters()];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|l| match l {
                Label::Cluster(c) => Label::Cluster(*map[*c].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                })),
                other => *other,
            })
            .collect();
        ClusterAssignment { labels, k: next }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of clusters, including empty ones of a declared `k`.
    pub fn n_clusters(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_clusters()];
        for c in self.labels.iter().filter_map(|l| l.cluster()) {
            counts[c] += 1;
        }
        counts
    }

    pub fn count_of(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// `row_index,label` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_index,label\n");
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("{i},{l}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("row_index,label") {
            return Err(Error::Parse("assignment file must start with `row_index,label`".into()));
        }
        let mut labels = Vec::new();
        for (expected, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let (idx, label) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad assignment line `{line}`")))?;
            if idx.trim().parse::<usize>().ok() != Some(expected) {
                return Err(Error::Parse(format!("row_index out of sequence at `{line}`")));
            }
            labels.push(label.trim().parse()?);
        }
        Self::new(labels)
    }
}
