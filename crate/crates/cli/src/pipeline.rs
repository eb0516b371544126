use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};

use crate::artifacts::ArtifactDir;
use crate::config::{AlgorithmConfig, DataSource, FeatureOptions, PipelineConfig, PlotSpec};
use steelclust_core::baseline::{cross_validate_zero_r, render_table, zero_r_fit};
use steelclust_core::data::{
    aggregate_sales, generate_sales_dataset, parse_csv, parse_csv_with_schema, parse_schema, serialize_csv,
    serialize_schema, split_indices, ColumnType, GeneratorConfig,
};
use steelclust_core::density::{dbscan, optics, optics_extract};
use steelclust_core::em::{em_fit, em_select_k, DEFAULT_LL_TOL};
use steelclust_core::evaluation::{classes_to_clusters, classes_to_clusters_for, cluster_summary, wcss};
use steelclust_core::feature_selection::best_first_search;
use steelclust_core::format::sig9;
use steelclust_core::hierarchical::{agglomerative, cobweb_fit};
use steelclust_core::partition::{density_wrap, farthest_first, kmeans, PartitionModel};
use steelclust_core::plot::emit_scatter_svg;
use steelclust_core::{compute_ranges, ClusterAssignment, Dataset, Label};

/// Columns that hold codes, read as nominal even when every cell is digits.
const CODE_COLUMNS: [&str; 4] = ["product_cd", "prod_desc", "customer_cd", "segment"];

/// Axis pairs plotted by `pipeline` when no `--plot` is given.
const DEFAULT_PLOTS: [(&str, &str); 2] = [("Customer_CD", "Sales_value"), ("Product_CD", "Sales_value")];

/// A failure tagged with the stage it happened in.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub source: anyhow::Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage `{}` failed: {:#}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {}

pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}

/// Reads a CSV file. Without a schema, types are inferred and code columns
/// are forced nominal.
pub fn read_dataset(path: &Path, schema: Option<&Path>) -> anyhow::Result<Dataset> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(schema_path) = schema {
        let schema_text =
            fs::read_to_string(schema_path).with_context(|| format!("reading {}", schema_path.display()))?;
        let schema = parse_schema(&schema_text)?;
        return Ok(parse_csv_with_schema(&text, &schema)?);
    }
    let inferred = parse_csv(&text, None)?;
    let hints: Vec<ColumnType> = inferred
        .schema()
        .iter()
        .map(|a| {
            if a.is_nominal() || CODE_COLUMNS.contains(&a.name.to_ascii_lowercase().as_str()) {
                ColumnType::Nominal
            } else {
                ColumnType::Numeric
            }
        })
        .collect();
    if inferred.schema().iter().zip(&hints).all(|(a, h)| a.is_nominal() == (*h == ColumnType::Nominal)) {
        return Ok(inferred);
    }
    Ok(parse_csv(&text, Some(&hints))?)
}

fn with_class(d: Dataset, class_attr: Option<&str>) -> anyhow::Result<Dataset> {
    match class_attr {
        Some(name) => Ok(d.with_class_name(name)?),
        None => Ok(d),
    }
}

fn write_dataset(out: &mut ArtifactDir, stem: &str, d: &Dataset) -> anyhow::Result<()> {
    out.write(&format!("{stem}.csv"), serialize_csv(d))?;
    out.write(&format!("{stem}.schema"), serialize_schema(d.schema()))
}

fn config_text(cfg: &PipelineConfig) -> String {
    let mut lines = vec!["# steelclust run configuration".to_string()];
    match &cfg.source {
        DataSource::Csv { path, schema } => {
            lines.push(format!("input={}", path.display()));
            if let Some(s) = schema {
                lines.push(format!("schema={}", s.display()));
            }
        }
        DataSource::Generate { rows, outliers } => {
            lines.push(format!("generate_rows={rows}"));
            lines.push(format!("generate_outliers={outliers}"));
        }
    }
    lines.push(format!("seed={}", cfg.seed));
    lines.push(format!("aggregate={}", cfg.aggregate));
    lines.push(format!("class_attr={}", cfg.class_attr.as_deref().unwrap_or("")));
    lines.push(format!("folds={}", cfg.folds));
    lines.push(format!("train_fraction={}", cfg.train_fraction));
    if let Some(f) = cfg.features {
        lines.push(format!("stale_limit={}", f.stale_limit));
        lines.push(format!("bins={}", f.bins.map_or("default".to_string(), |b| b.to_string())));
    }
    if let Some(a) = &cfg.algorithm {
        lines.push(format!("algorithm={a:?}"));
    }
    for p in &cfg.plots {
        lines.push(format!("plot={}:{}", p.x, p.y));
    }
    lines.join("\n") + "\n"
}

/// Runs the configured stages in order and writes the manifest last.
/// Returns the artifact names.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Vec<String>, StageError> {
    cfg.validate().stage("config")?;
    let mut out = ArtifactDir::create(&cfg.out).stage("ingest")?;
    let full_run = cfg.algorithm.is_some() && cfg.evaluate;
    if full_run {
        out.write("config.txt", config_text(cfg)).stage("ingest")?;
    }

    let mut d = match &cfg.source {
        DataSource::Csv { path, schema } => read_dataset(path, schema.as_deref()).stage("ingest")?,
        DataSource::Generate { rows, outliers } => {
            let d = generate_sales_dataset(&GeneratorConfig::table5(*rows, *outliers, cfg.seed)).stage("ingest")?;
            write_dataset(&mut out, "data", &d).stage("ingest")?;
            d
        }
    };
    if cfg.aggregate {
        d = aggregate_sales(&d).stage("aggregate")?;
        write_dataset(&mut out, "aggregated", &d).stage("aggregate")?;
    }
    d = with_class(d, cfg.class_attr.as_deref()).stage("ingest")?;

    if cfg.baseline {
        baseline_stage(&d, cfg.folds, cfg.seed, &mut out).stage("baseline")?;
    }
    let clustered = match cfg.features {
        Some(opts) => select_stage(&d, opts, &mut out).stage("select-features")?,
        None => d.clone(),
    };
    if let Some(alg) = &cfg.algorithm {
        let result = cluster_stage(&clustered, alg, cfg.train_fraction, cfg.folds, cfg.seed, &mut out)
            .stage("cluster")?;
        summary_stage(&clustered, &result.assignment, &mut out).stage("evaluate")?;
        if cfg.evaluate {
            evaluate_stage(&clustered, &result.assignment, &result.holdout, &mut out).stage("evaluate")?;
        }
        let plots: Vec<PlotSpec> = if cfg.plots.is_empty() && cfg.evaluate {
            DEFAULT_PLOTS
                .iter()
                .filter(|(x, y)| d.attribute_index(x).is_some() && d.attribute_index(y).is_some())
                .map(|(x, y)| PlotSpec {
                    x: x.to_string(),
                    y: y.to_string(),
                })
                .collect()
        } else {
            cfg.plots.clone()
        };
        plot_stage(&d, &result.assignment, &plots, &mut out).stage("plot")?;
    }
    out.finish().stage("manifest")
}

pub fn baseline_stage(d: &Dataset, folds: usize, seed: u64, out: &mut ArtifactDir) -> anyhow::Result<()> {
    let targets: Vec<usize> = d.active_attributes().into_iter().filter(|&a| d.schema()[a].is_numeric()).collect();
    if targets.is_empty() {
        return Err(anyhow!("no numeric attributes to predict"));
    }
    let mut columns = Vec::new();
    let mut flat = String::new();
    for &a in &targets {
        let name = d.schema()[a].name.clone();
        let prediction = zero_r_fit(d, a)?
            .numeric_prediction()
            .expect("numeric target");
        let report = cross_validate_zero_r(d, a, folds, seed)?;
        flat.push_str(&format!("[{name}]\nzero_r_prediction={}\n{}", sig9(prediction), report.to_text()));
        out.write(&format!("baseline_{name}.json"), report.to_json() + "\n")?;
        columns.push((name, prediction, report));
    }
    let header = format!("# ZeroR, {folds}-fold cross-validation, seed {seed}\n");
    out.write("baseline.txt", header + &render_table(&columns))?;
    out.write("baseline_metrics.txt", flat)
}

/// Keeps the selected attributes plus the class.
pub fn select_stage(d: &Dataset, opts: FeatureOptions, out: &mut ArtifactDir) -> anyhow::Result<Dataset> {
    let class = d
        .class_index()
        .ok_or_else(|| anyhow!("feature selection needs a class attribute"))?;
    let result = best_first_search(d, class, Some(opts.stale_limit), opts.bins)?;
    out.write("features.txt", result.report(d))?;
    let mut keep = result.selected.clone();
    keep.push(class);
    keep.sort_unstable();
    let projected = d.project(&keep)?;
    write_dataset(out, "selected", &projected)?;
    Ok(projected)
}

pub struct Clustered {
    /// One label per row of the clustered dataset.
    pub assignment: ClusterAssignment,
    /// Rows that were not used for fitting.
    pub holdout: Vec<usize>,
}

fn spread(train_rows: &[usize], train: &ClusterAssignment, n: usize) -> Vec<Label> {
    let mut labels = vec![Label::Noise; n];
    for (&r, &l) in train_rows.iter().zip(train.labels()) {
        labels[r] = l;
    }
    labels
}

fn partition_artifacts(
    m: &PartitionModel,
    a: &ClusterAssignment,
    train: &Dataset,
    out: &mut ArtifactDir,
) -> anyhow::Result<()> {
    out.write("model.txt", m.to_text(train))?;
    let density = density_wrap(m, a, train)?;
    out.write("density.txt", density.to_text(train))
}

pub fn cluster_stage(
    d: &Dataset,
    alg: &AlgorithmConfig,
    train_fraction: f64,
    folds: usize,
    seed: u64,
    out: &mut ArtifactDir,
) -> anyhow::Result<Clustered> {
    if d.is_empty() {
        return Err(anyhow!("no rows to cluster"));
    }
    let n = d.len();
    let (train_rows, holdout) = if alg.predicts() && train_fraction < 1.0 {
        split_indices(n, train_fraction, seed)?
    } else {
        ((0..n).collect(), Vec::new())
    };
    if train_rows.is_empty() {
        return Err(anyhow!("--train-fraction {train_fraction} leaves no training rows"));
    }
    let train = d.subset(&train_rows);
    let (labels, k) = match *alg {
        AlgorithmConfig::KMeans { k, max_iter } => {
            let (m, a) = kmeans(&train, k, seed, max_iter)?;
            partition_artifacts(&m, &a, &train, out)?;
            let mut labels = spread(&train_rows, &a, n);
            for &r in &holdout {
                labels[r] = Label::Cluster(m.nearest(d.row(r)));
            }
            (labels, m.k)
        }
        AlgorithmConfig::FarthestFirst { k } => {
            let (m, a) = farthest_first(&train, k, seed)?;
            partition_artifacts(&m, &a, &train, out)?;
            let mut labels = spread(&train_rows, &a, n);
            for &r in &holdout {
                labels[r] = Label::Cluster(m.nearest(d.row(r)));
            }
            (labels, m.k)
        }
        AlgorithmConfig::Em { k, k_max, max_iter } => {
            let (m, a) = match k {
                Some(k) => em_fit(&train, k, seed, max_iter, DEFAULT_LL_TOL)?,
                None => em_select_k(&train, seed, folds, k_max, max_iter, DEFAULT_LL_TOL)?,
            };
            let mut text = m.to_text(&train, &a);
            let mut labels = spread(&train_rows, &a, n);
            if !holdout.is_empty() {
                let held = d.subset(&holdout);
                let ha = m.assign(&held)?;
                for (&r, &l) in holdout.iter().zip(ha.labels()) {
                    labels[r] = l;
                }
                let ll = steelclust_core::em::avg_log_likelihood(&m, &held)?;
                text.push_str(&format!("holdout_avg_log_likelihood={}\nholdout_instances={}\n", sig9(ll), held.len()));
            }
            out.write("model.txt", text)?;
            (labels, m.k)
        }
        AlgorithmConfig::Dbscan { eps, min_points } => {
            let a = dbscan(d, eps, min_points)?;
            out.write(
                "model.txt",
                format!(
                    "# steelclust density model\nversion=1\nalgorithm=dbscan\neps={}\nmin_points={min_points}\nclusters={}\nnoise={}\n",
                    sig9(eps),
                    a.n_clusters(),
                    a.count_of(Label::Noise)
                ),
            )?;
            let k = a.n_clusters();
            (a.labels().to_vec(), k)
        }
        AlgorithmConfig::Optics { eps, min_points } => {
            let o = optics(d, eps, min_points)?;
            let a = optics_extract(&o, eps)?;
            out.write(
                "model.txt",
                format!(
                    "# steelclust density model\nversion=1\nalgorithm=optics\neps={}\nmin_points={min_points}\nextraction_eps={}\nclusters={}\nnoise={}\nundefined_reachability_fraction={}\n",
                    sig9(eps),
                    sig9(eps),
                    a.n_clusters(),
                    a.count_of(Label::Noise),
                    sig9(o.undefined_fraction())
                ),
            )?;
            out.write("reachability.csv", o.to_plot_data())?;
            let fmt = |v: Option<f64>| v.map_or("UNDEFINED".to_string(), sig9);
            let mut ordering = String::from("position,row_index,reachability,core_distance\n");
            for (pos, &row) in o.order.iter().enumerate() {
                ordering.push_str(&format!(
                    "{pos},{row},{},{}\n",
                    fmt(o.reachability[pos]),
                    fmt(o.core_distance[pos])
                ));
            }
            out.write("ordering.csv", ordering)?;
            let k = a.n_clusters();
            (a.labels().to_vec(), k)
        }
        AlgorithmConfig::Cobweb { acuity, cutoff } => {
            let (tree, a) = cobweb_fit(d, acuity, cutoff, seed)?;
            out.write(
                "model.txt",
                format!(
                    "# steelclust cobweb tree\nversion=1\nalgorithm=cobweb\nacuity={}\ncutoff={}\nleaves={}\nnode_visits={}\n{}",
                    sig9(acuity),
                    sig9(cutoff),
                    tree.leaves().len(),
                    tree.visits,
                    tree.dump(d)
                ),
            )?;
            let k = a.n_clusters();
            (a.labels().to_vec(), k)
        }
        AlgorithmConfig::Agglomerative { k, linkage } => {
            let (dg, a) = agglomerative(d, linkage, k)?;
            out.write(
                "model.txt",
                format!("# steelclust agglomerative model\nversion=1\nalgorithm=agglomerative\nlinkage={linkage}\nk={k}\n"),
            )?;
            out.write("dendrogram.txt", dg.to_text())?;
            (a.labels().to_vec(), k)
        }
    };
    let assignment = ClusterAssignment::with_k(labels, k)?;
    out.write("assignments.csv", assignment.to_csv())?;
    Ok(Clustered { assignment, holdout })
}

pub fn summary_stage(d: &Dataset, a: &ClusterAssignment, out: &mut ArtifactDir) -> anyhow::Result<()> {
    let s = cluster_summary(a, d)?;
    out.write("summary.txt", s.to_table())?;
    out.write("summary.csv", s.to_csv())
}

/// WCSS over the whole dataset plus classes-to-clusters reports when a
/// class attribute is set (all rows, and the holdout rows alone).
pub fn evaluate_stage(d: &Dataset, a: &ClusterAssignment, holdout: &[usize], out: &mut ArtifactDir) -> anyhow::Result<()> {
    let mut text = format!(
        "# steelclust evaluation\nclusters={}\nnoise={}\nundefined={}\nwcss={}\n",
        a.n_clusters(),
        a.count_of(Label::Noise),
        a.count_of(Label::Undefined),
        sig9(wcss(a, d, &compute_ranges(d))?)
    );
    if let Some(class) = d.class_index() {
        let report = classes_to_clusters_for(a, d)?;
        text.push_str(&format!("class_attribute={}\n\n", d.schema()[class].name));
        text.push_str(&report.to_text());
        out.write("classes_to_clusters.json", report.to_json() + "\n")?;
        if !holdout.is_empty() {
            let names = d.schema()[class].domain().expect("nominal class").to_vec();
            let classes: Vec<usize> = holdout.iter().map(|&r| d.row(r).nominal(class)).collect();
            let labels: Vec<Label> = holdout.iter().map(|&r| a.labels()[r]).collect();
            let held = ClusterAssignment::with_k(labels, a.n_clusters())?;
            let report = classes_to_clusters(&held, &classes, &names)?;
            text.push_str(&format!("\n# holdout rows only ({})\n", holdout.len()));
            text.push_str(&report.to_text());
            out.write("classes_to_clusters_holdout.json", report.to_json() + "\n")?;
        }
    }
    out.write("evaluation.txt", text)
}

pub fn plot_stage(d: &Dataset, a: &ClusterAssignment, plots: &[PlotSpec], out: &mut ArtifactDir) -> anyhow::Result<()> {
    for p in plots {
        let find = |name: &str| {
            d.attribute_index(name)
                .ok_or_else(|| anyhow!("plot attribute `{name}` is not in the dataset"))
        };
        let svg = emit_scatter_svg(d, find(&p.x)?, find(&p.y)?, a)?;
        out.write(&p.file_name(), svg)?;
    }
    Ok(())
}

/// `evaluate` and `plot`: a dataset plus a previously written assignment file.
pub fn run_on_assignments(
    input: &DataSource,
    class_attr: Option<&str>,
    assignments: &Path,
    plots: &[PlotSpec],
    out_dir: &Path,
) -> Result<Vec<String>, StageError> {
    let DataSource::Csv { path, schema } = input else {
        unreachable!("assignment commands read CSV input")
    };
    let d = read_dataset(path, schema.as_deref())
        .and_then(|d| with_class(d, class_attr))
        .stage("ingest")?;
    let text = fs::read_to_string(assignments)
        .with_context(|| format!("reading {}", assignments.display()))
        .stage("ingest")?;
    let a = ClusterAssignment::from_csv(&text).stage("ingest")?;
    if a.len() != d.len() {
        return Err(anyhow!("{} labels for {} rows", a.len(), d.len())).stage("ingest");
    }
    let mut out = ArtifactDir::create(out_dir).stage("ingest")?;
    if plots.is_empty() {
        summary_stage(&d, &a, &mut out).stage("evaluate")?;
        evaluate_stage(&d, &a, &[], &mut out).stage("evaluate")?;
    } else {
        plot_stage(&d, &a, plots, &mut out).stage("plot")?;
    }
    out.finish().stage("manifest")
}
