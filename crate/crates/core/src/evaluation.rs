//! Cluster quality: within-cluster sum of squares, classes-to-clusters
//! accuracy and per-cluster summaries.

use serde::Serialize;

use crate::assignment::{ClusterAssignment, Label};
use crate::baseline::argmax_first;
use crate::data::{Dataset, DistanceSpace, Ranges, Value};
use crate::error::{Error, Result};
use crate::format::{fixed4, sig9};
use crate::partition::compute_centroids;
use crate::stats::{mean, std_dev};

fn check_len(assignment: &ClusterAssignment, n: usize) -> Result<()> {
    if assignment.len() != n {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: n,
        });
    }
    Ok(())
}

/// Squared normalized distance of every clustered instance to its cluster's
/// centroid, summed. NOISE and UNDEFINED rows are skipped.
pub fn wcss(assignment: &ClusterAssignment, d: &Dataset, ranges: &Ranges) -> Result<f64> {
    check_len(assignment, d.len())?;
    let rows: Vec<usize> = (0..d.len())
        .filter(|&i| assignment.labels()[i].cluster().is_some())
        .collect();
    let labels: Vec<usize> = rows
        .iter()
        .map(|&i| assignment.labels()[i].cluster().unwrap())
        .collect();
    let sub = d.subset(&rows);
    let centroids = compute_centroids(&sub, &labels, assignment.n_clusters());
    let space = DistanceSpace::new(ranges.clone(), d.active_attributes());
    Ok(sub
        .rows()
        .iter()
        .zip(&labels)
        .map(|(x, &l)| space.squared(x, centroids[l].as_ref().expect("member exists")))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassesToClustersReport {
    pub class_names: Vec<String>,
    /// `contingency[class][cluster]`, over clustered rows only.
    pub contingency: Vec<Vec<usize>>,
    /// Majority class per cluster; `None` for an empty cluster.
    pub mapping: Vec<Option<usize>>,
    pub evaluated: usize,
    pub excluded_noise: usize,
    pub incorrect: usize,
}

impl ClassesToClustersReport {
    pub fn accuracy_pct(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            100.0 * (self.evaluated - self.incorrect) as f64 / self.evaluated as f64
        }
    }

    pub fn incorrect_pct(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            100.0 * self.incorrect as f64 / self.evaluated as f64
        }
    }

    pub fn to_text(&self) -> String {
        let k = self.mapping.len();
        let mut out = String::from("Classes to clusters evaluation\n\n");
        let header: Vec<String> = (0..k).map(|c| format!("{c:>8}")).collect();
        out.push_str(&format!("{}  <-- assigned to cluster\n", header.join("")));
        for (ci, row) in self.contingency.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>8}")).collect();
            out.push_str(&format!("{} | {}\n", cells.join(""), self.class_names[ci]));
        }
        out.push('\n');
        for (c, m) in self.mapping.iter().enumerate() {
            match m {
                Some(ci) => out.push_str(&format!("Cluster {c} <-- {}\n", self.class_names[*ci])),
                None => out.push_str(&format!("Cluster {c} <-- No class\n")),
            }
        }
        out.push_str(&format!(
            "\nIncorrectly clustered instances : {} ({}%)\n",
            self.incorrect,
            fixed4(self.incorrect_pct())
        ));
        out.push_str(&format!("Accuracy : {}%\n", fixed4(self.accuracy_pct())));
        if self.excluded_noise > 0 {
            out.push_str(&format!("Excluded NOISE/UNDEFINED instances : {}\n", self.excluded_noise));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Maps each cluster to its majority class (ties to class domain order) and
/// counts the clustered rows that disagree with their cluster's class.
pub fn classes_to_clusters(
    assignment: &ClusterAssignment,
    classes: &[usize],
    class_names: &[String],
) -> Result<ClassesToClustersReport> {
    check_len(assignment, classes.len())?;
    let k = assignment.n_clusters();
    let mut contingency = vec![vec![0usize; k]; class_names.len()];
    let mut excluded = 0;
    for (label, &class) in assignment.labels().iter().zip(classes) {
        if class >= class_names.len() {
            return Err(Error::InvalidParameter(format!("class index {class} outside domain")));
        }
        match label.cluster() {
            Some(c) => contingency[class][c] += 1,
            None => excluded += 1,
        }
    }
    let mut mapping = Vec::with_capacity(k);
    let mut correct = 0;
    for c in 0..k {
        let column: Vec<usize> = contingency.iter().map(|row| row[c]).collect();
        if column.iter().all(|&v| v == 0) {
            mapping.push(None);
        } else {
            let best = argmax_first(&column);
            correct += column[best];
            mapping.push(Some(best));
        }
    }
    let evaluated = classes.len() - excluded;
    Ok(ClassesToClustersReport {
        class_names: class_names.to_vec(),
        contingency,
        mapping,
        evaluated,
        excluded_noise: excluded,
        incorrect: evaluated - correct,
    })
}

/// Convenience wrapper reading the class column of `d`.
pub fn classes_to_clusters_for(assignment: &ClusterAssignment, d: &Dataset) -> Result<ClassesToClustersReport> {
    let class = d
        .class_index()
        .ok_or_else(|| Error::InvalidParameter("dataset has no class attribute".into()))?;
    let names = d.schema()[class]
        .domain()
        .ok_or_else(|| Error::NotNominal(d.schema()[class].name.clone()))?;
    classes_to_clusters(assignment, &d.nominal_column(class), names)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AttributeSummary {
    Numeric { mean: f64, std: f64 },
    /// Mode symbol; `None` for an empty column.
    Nominal { mode: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryColumn {
    /// "Full Data", "Cluster#k", "NOISE" or "UNDEFINED".
    pub name: String,
    pub count: usize,
    pub percent: f64,
    pub attributes: Vec<AttributeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub attribute_names: Vec<String>,
    pub attribute_units: Vec<String>,
    /// Full data first, then clusters by index, then pseudo-rows.
    pub columns: Vec<SummaryColumn>,
}

fn summarize(d: &Dataset, attrs: &[usize], rows: &[usize], name: String, n: usize) -> SummaryColumn {
    let attributes = attrs
        .iter()
        .map(|&a| match d.schema()[a].domain() {
            None => {
                let xs: Vec<f64> = rows.iter().map(|&r| d.row(r).numeric(a)).collect();
                if xs.is_empty() {
                    AttributeSummary::Numeric { mean: 0.0, std: 0.0 }
                } else {
                    AttributeSummary::Numeric {
                        mean: mean(&xs),
                        std: std_dev(&xs),
                    }
                }
            }
            Some(domain) => {
                let mut counts = vec![0usize; domain.len()];
                for &r in rows {
                    counts[d.row(r).nominal(a)] += 1;
                }
                let mode = (!rows.is_empty()).then(|| d.render_value(a, Value::Nominal(argmax_first(&counts))));
                AttributeSummary::Nominal { mode }
            }
        })
        .collect();
    SummaryColumn {
        name,
        count: rows.len(),
        percent: if n == 0 { 0.0 } else { 100.0 * rows.len() as f64 / n as f64 },
        attributes,
    }
}

/// Per-cluster modes, means and population standard deviations over the
/// non-class attributes.
pub fn cluster_summary(assignment: &ClusterAssignment, d: &Dataset) -> Result<ClusterSummary> {
    check_len(assignment, d.len())?;
    let attrs = d.active_attributes();
    let n = d.len();
    let all: Vec<usize> = (0..n).collect();
    let mut columns = vec![summarize(d, &attrs, &all, "Full Data".into(), n)];
    let labels = assignment.labels();
    for c in 0..assignment.n_clusters() {
        let rows: Vec<usize> = all.iter().copied().filter(|&i| labels[i] == Label::Cluster(c)).collect();
        columns.push(summarize(d, &attrs, &rows, format!("Cluster#{c}"), n));
    }
    for pseudo in [Label::Noise, Label::Undefined] {
        let rows: Vec<usize> = all.iter().copied().filter(|&i| labels[i] == pseudo).collect();
        if !rows.is_empty() {
            columns.push(summarize(d, &attrs, &rows, pseudo.to_string(), n));
        }
    }
    Ok(ClusterSummary {
        attribute_names: attrs.iter().map(|&a| d.schema()[a].name.clone()).collect(),
        attribute_units: attrs
            .iter()
            .map(|&a| d.schema()[a].units().unwrap_or("").to_string())
            .collect(),
        columns,
    })
}

impl ClusterSummary {
    /// Full-data mean of numeric attribute row `j`.
    pub fn full_mean(&self, j: usize) -> Option<f64> {
        match &self.columns[0].attributes[j] {
            AttributeSummary::Numeric { mean, .. } => Some(*mean),
            AttributeSummary::Nominal { .. } => None,
        }
    }

    /// Human table: attributes as rows, one column per cluster, 4 decimals.
    pub fn to_table(&self) -> String {
        let headers: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{} ({})", c.name, c.count))
            .collect();
        let mut rows: Vec<Vec<String>> = Vec::new();
        rows.push(
            std::iter::once("Attribute".to_string())
                .chain(headers.iter().cloned())
                .collect(),
        );
        rows.push(
            std::iter::once("Share".to_string())
                .chain(self.columns.iter().map(|c| format!("{}%", c.percent.round() as i64)))
                .collect(),
        );
        for (j, name) in self.attribute_names.iter().enumerate() {
            let numeric = matches!(self.columns[0].attributes[j], AttributeSummary::Numeric { .. });
            let mut row = vec![name.clone()];
            let mut std_row = vec!["  +/-".to_string()];
            for c in &self.columns {
                match &c.attributes[j] {
                    AttributeSummary::Numeric { mean, std } => {
                        row.push(fixed4(*mean));
                        std_row.push(fixed4(*std));
                    }
                    AttributeSummary::Nominal { mode } => row.push(mode.clone().unwrap_or_else(|| "-".into())),
                }
            }
            rows.push(row);
            if numeric {
                rows.push(std_row);
            }
        }
        let ncol = rows[0].len();
        let widths: Vec<usize> = (0..ncol)
            .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    if i == 0 {
                        format!("{s:<w$}", w = widths[i])
                    } else {
                        format!("{s:>w$}", w = widths[i])
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Machine CSV: `attribute,statistic,<column names...>` at 9 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let mut out = format!("attribute,statistic,{}\n", names.join(","));
        let join = |f: &dyn Fn(&SummaryColumn) -> String| -> String {
            self.columns.iter().map(f).collect::<Vec<_>>().join(",")
        };
        out.push_str(&format!("_instances,count,{}\n", join(&|c| c.count.to_string())));
        out.push_str(&format!("_instances,percent,{}\n", join(&|c| sig9(c.percent))));
        for (j, name) in self.attribute_names.iter().enumerate() {
            match &self.columns[0].attributes[j] {
                AttributeSummary::Numeric { .. } => {
                    for (stat, pick) in [("mean", 0), ("std", 1)] {
                        let body = join(&|c| match &c.attributes[j] {
                            AttributeSummary::Numeric { mean, std } => sig9(if pick == 0 { *mean } else { *std }),
                            AttributeSummary::Nominal { .. } => String::new(),
                        });
                        out.push_str(&format!("{name},{stat},{body}\n"));
                    }
                }
                AttributeSummary::Nominal { .. } => {
                    let body = join(&|c| match &c.attributes[j] {
                        AttributeSummary::Nominal { mode } => mode.clone().unwrap_or_default(),
                        AttributeSummary::Numeric { .. } => String::new(),
                    });
                    out.push_str(&format!("{name},mode,{body}\n"));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{compute_ranges, AttributeSpec, Instance};
    use crate::partition::kmeans;

    fn one_d(xs: &[f64]) -> Dataset {
        Dataset::new(
            vec![AttributeSpec::numeric("x", "tons")],
            xs.iter().map(|&x| Instance::new(vec![Value::Numeric(x)])).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn wcss_singletons_and_four_points() {
        let d = one_d(&[0.0, 0.1, 0.9, 1.0]);
        let r = compute_ranges(&d);
        let own = ClusterAssignment::from_indices(&[0, 1, 2, 3]).unwrap();
        assert_eq!(wcss(&own, &d, &r).unwrap(), 0.0);
        let two = ClusterAssignment::from_indices(&[0, 0, 1, 1]).unwrap();
        assert!((wcss(&two, &d, &r).unwrap() - 0.01).abs() < 1e-12);
        let (m, a) = kmeans(&d, 2, 3, 100).unwrap();
        assert!((wcss(&a, &d, &r).unwrap() - m.wcss).abs() < 1e-12);
    }

    #[test]
    fn wcss_skips_noise() {
        let d = one_d(&[0.0, 10.0, 0.0]);
        let a = ClusterAssignment::new(vec![Label::Cluster(0), Label::Noise, Label::Cluster(0)]).unwrap();
        assert_eq!(wcss(&a, &d, &compute_ranges(&d)).unwrap(), 0.0);
    }

    #[test]
    fn majority_mapping() {
        let names = vec!["x".to_string(), "y".to_string()];
        let a = ClusterAssignment::from_indices(&[0, 0, 0, 1]).unwrap();
        let r = classes_to_clusters(&a, &[0, 0, 1, 1], &names).unwrap();
        assert_eq!(r.mapping, vec![Some(0), Some(1)]);
        assert_eq!(r.incorrect, 1);
        assert_eq!(r.accuracy_pct(), 75.0);
        assert_eq!(r.contingency, vec![vec![2, 0], vec![1, 1]]);
        let perfect = classes_to_clusters(&ClusterAssignment::from_indices(&[1, 1, 0, 0]).unwrap(), &[0, 0, 1, 1], &names)
            .unwrap();
        assert_eq!(perfect.accuracy_pct(), 100.0);
        assert!(r.to_text().contains("Cluster 0 <-- x"));
    }

    #[test]
    fn ties_follow_domain_order_and_noise_excluded() {
        let names = vec!["x".to_string(), "y".to_string()];
        let a = ClusterAssignment::new(vec![Label::Cluster(0), Label::Cluster(0), Label::Noise]).unwrap();
        let r = classes_to_clusters(&a, &[1, 0, 1], &names).unwrap();
        assert_eq!(r.mapping, vec![Some(0)]);
        assert_eq!((r.evaluated, r.excluded_noise, r.incorrect), (2, 1, 1));
    }

    #[test]
    fn summary_hand_case() {
        let d = one_d(&[1.0, 3.0, 11.0]);
        let a = ClusterAssignment::from_indices(&[0, 0, 1]).unwrap();
        let s = cluster_summary(&a, &d).unwrap();
        let means: Vec<f64> = s
            .columns
            .iter()
            .map(|c| match c.attributes[0] {
                AttributeSummary::Numeric { mean, .. } => mean,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(means, vec![5.0, 2.0, 11.0]);
        assert_eq!(s.columns[1].attributes[0], AttributeSummary::Numeric { mean: 2.0, std: 1.0 });
        assert!(s.to_table().contains("Cluster#0 (2)"));
        assert!(s.to_csv().starts_with("attribute,statistic,Full Data,Cluster#0,Cluster#1\n_instances,count,3,2,1\n"));
    }

    #[test]
    fn summary_pseudo_rows_and_single_cluster() {
        let d = one_d(&[1.0, 2.0, 9.0]);
        let one = cluster_summary(&ClusterAssignment::from_indices(&[0, 0, 0]).unwrap(), &d).unwrap();
        assert_eq!(one.columns[0].attributes, one.columns[1].attributes);
        let noisy = ClusterAssignment::new(vec![Label::Noise; 3]).unwrap();
        let s = cluster_summary(&noisy, &d).unwrap();
        assert_eq!(s.columns.len(), 2);
        assert_eq!(s.columns[1].name, "NOISE");
        assert_eq!(s.columns[1].percent, 100.0);
    }
}
