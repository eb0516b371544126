use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{AlgorithmConfig, ConfigError, DataSource, FeatureOptions, PipelineConfig, PlotSpec};
use steelclust_core::hierarchical::{Linkage, DEFAULT_ACUITY, DEFAULT_CUTOFF};

#[derive(Parser, Debug)]
#[command(name = "steelclust", version, about = "Clustering toolkit for aggregated steel sales data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a seeded synthetic sales dataset
    Generate(GenerateArgs),
    /// Collapse sale-order lines into one row per product and customer
    Aggregate(AggregateArgs),
    /// ZeroR baseline with pooled k-fold cross-validation
    Baseline(BaselineArgs),
    /// CFS merit with forward best-first search
    SelectFeatures(SelectArgs),
    /// Fit one clustering algorithm and write its model and assignments
    Cluster(ClusterArgs),
    /// Classes-to-clusters evaluation and cluster summary of an assignment file
    Evaluate(EvaluateArgs),
    /// 2-D scatter plots of an assignment file
    Plot(PlotArgs),
    /// Every stage in order: ingest, aggregate, baseline, features, cluster, evaluate, plot
    Pipeline(PipelineArgs),
    /// Check every digest listed in an output directory's manifest
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// CSV file with a header row
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Sidecar schema, one line per column
    #[arg(long, value_name = "PATH")]
    pub schema: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct GeneratorArgs {
    /// Rows to generate, outliers included
    #[arg(long, default_value_t = 1000)]
    pub rows: usize,
    /// Extreme rows appended after the segment rows
    #[arg(long, default_value_t = 0)]
    pub outliers: usize,
}

#[derive(Args, Debug, Clone)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug, Clone)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Attribute excluded from the baseline targets
    #[arg(long, value_name = "NAME")]
    pub class_attr: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct FeatureArgs {
    /// Stop after this many non-improving expansions
    #[arg(long, default_value_t = 5)]
    pub stale_limit: usize,
    /// Equal-frequency bins for numeric attributes (default min(10, ceil(sqrt n)))
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, value_name = "NAME")]
    pub class_attr: String,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Kmeans,
    Em,
    Dbscan,
    Optics,
    Cobweb,
    FarthestFirst,
    Agglomerative,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkageArg {
    Single,
    Complete,
    Average,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Single => Linkage::Single,
            LinkageArg::Complete => Linkage::Complete,
            LinkageArg::Average => Linkage::Average,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct AlgoArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Number of clusters (EM selects k by cross-validation when omitted)
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub min_points: Option<usize>,
    #[arg(long)]
    pub acuity: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long, value_enum)]
    pub linkage: Option<LinkageArg>,
    /// Iteration cap for k-means and EM
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Largest k tried by EM's cross-validated selection
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Cross-validation folds for EM's k selection
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Share of rows used to fit k-means, farthest-first and EM
    #[arg(long, default_value_t = 0.66)]
    pub train_fraction: f64,
    /// Attribute left out of the distance and used for evaluation
    #[arg(long, value_name = "NAME")]
    pub class_attr: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// `row_index,label` file written by `cluster`
    #[arg(long, value_name = "PATH")]
    pub assignments: PathBuf,
    #[arg(long, value_name = "NAME")]
    pub class_attr: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, value_name = "PATH")]
    pub assignments: PathBuf,
    /// Axis pair `X:Y` by attribute name; repeatable
    #[arg(long, value_name = "X:Y", required = true)]
    pub plot: Vec<String>,
    #[arg(long, value_name = "NAME")]
    pub class_attr: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Generate synthetic data instead of reading `--input`
    #[arg(long)]
    pub generate: bool,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// The input holds sale-order lines to aggregate first
    #[arg(long)]
    pub aggregate: bool,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.66)]
    pub train_fraction: f64,
    #[arg(long, value_name = "NAME")]
    pub class_attr: Option<String>,
    /// Run CFS selection against the class attribute before clustering
    #[arg(long)]
    pub select_features: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, value_name = "X:Y")]
    pub plot: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Directory holding `manifest.txt`
    #[arg(value_name = "DIR")]
    pub dir: PathBuf,
}

impl Command {
    /// The `--out` directory, for commands that write artifacts.
    pub fn out_dir(&self) -> Option<&std::path::Path> {
        let out = match self {
            Command::Generate(a) => &a.out,
            Command::Aggregate(a) => &a.out,
            Command::Baseline(a) => &a.out,
            Command::SelectFeatures(a) => &a.out,
            Command::Cluster(a) => &a.out,
            Command::Evaluate(a) => &a.out,
            Command::Plot(a) => &a.out,
            Command::Pipeline(a) => &a.out,
            Command::Verify(_) => return None,
        };
        Some(&out.out)
    }
}

impl InputArgs {
    pub fn source(&self) -> Result<DataSource, ConfigError> {
        match &self.input {
            Some(path) => Ok(DataSource::Csv {
                path: path.clone(),
                schema: self.schema.clone(),
            }),
            None => Err(ConfigError("`--input` is required".into())),
        }
    }
}

impl AlgoArgs {
    /// Checks that only flags meaningful for the chosen algorithm were given
    /// and that every value is in range.
    pub fn to_config(&self) -> Result<AlgorithmConfig, ConfigError> {
        let given: [(&str, bool); 7] = [
            ("--k", self.k.is_some()),
            ("--eps", self.eps.is_some()),
            ("--min-points", self.min_points.is_some()),
            ("--acuity", self.acuity.is_some()),
            ("--cutoff", self.cutoff.is_some()),
            ("--linkage", self.linkage.is_some()),
            ("--max-iter", self.max_iter.is_some()),
        ];
        let allowed: &[&str] = match self.algo {
            Algo::Kmeans => &["--k", "--max-iter"],
            Algo::FarthestFirst => &["--k"],
            Algo::Em => &["--k", "--max-iter"],
            Algo::Dbscan | Algo::Optics => &["--eps", "--min-points"],
            Algo::Cobweb => &["--acuity", "--cutoff"],
            Algo::Agglomerative => &["--k", "--linkage"],
        };
        let name = self.algo.to_possible_value().expect("no skipped variants").get_name().to_string();
        for (flag, present) in given {
            if present && !allowed.contains(&flag) {
                return Err(ConfigError(format!("{flag} does not apply to --algo {name}")));
            }
        }
        if self.k_max.is_some() && !(self.algo == Algo::Em && self.k.is_none()) {
            return Err(ConfigError("--k-max only applies to --algo em without --k".into()));
        }
        let cfg = match self.algo {
            Algo::Kmeans => AlgorithmConfig::KMeans {
                k: self.k.unwrap_or(2),
                max_iter: self.max_iter.unwrap_or(steelclust_core::partition::DEFAULT_MAX_ITER),
            },
            Algo::FarthestFirst => AlgorithmConfig::FarthestFirst { k: self.k.unwrap_or(2) },
            Algo::Em => AlgorithmConfig::Em {
                k: self.k,
                k_max: self.k_max.unwrap_or(8),
                max_iter: self.max_iter.unwrap_or(100),
            },
            Algo::Dbscan => AlgorithmConfig::Dbscan {
                eps: self.eps.unwrap_or(0.9),
                min_points: self.min_points.unwrap_or(6),
            },
            Algo::Optics => AlgorithmConfig::Optics {
                eps: self.eps.unwrap_or(0.9),
                min_points: self.min_points.unwrap_or(6),
            },
            Algo::Cobweb => AlgorithmConfig::Cobweb {
                acuity: self.acuity.unwrap_or(DEFAULT_ACUITY),
                cutoff: self.cutoff.unwrap_or(DEFAULT_CUTOFF),
            },
            Algo::Agglomerative => AlgorithmConfig::Agglomerative {
                k: self.k.unwrap_or(2),
                linkage: self.linkage.map_or(Linkage::Single, Linkage::from),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_plots(specs: &[String]) -> Result<Vec<PlotSpec>, ConfigError> {
    specs.iter().map(|s| PlotSpec::parse(s)).collect()
}

impl ClusterArgs {
    pub fn to_config(&self) -> Result<PipelineConfig, ConfigError> {
        let algorithm = self.algo.to_config()?;
        let cfg = PipelineConfig {
            source: self.input.source()?,
            aggregate: false,
            baseline: false,
            features: None,
            class_attr: self.class_attr.clone(),
            algorithm: Some(algorithm),
            evaluate: false,
            folds: self.folds,
            train_fraction: self.train_fraction,
            plots: Vec::new(),
            out: self.out.out.clone(),
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PipelineArgs {
    pub fn to_config(&self) -> Result<PipelineConfig, ConfigError> {
        let source = match (self.generate, &self.input.input) {
            (true, Some(_)) => return Err(ConfigError("give either --input or --generate, not both".into())),
            (true, None) => DataSource::Generate {
                rows: self.generator.rows,
                outliers: self.generator.outliers,
            },
            (false, _) => self.input.source()?,
        };
        let cfg = PipelineConfig {
            source,
            aggregate: self.aggregate,
            baseline: true,
            features: self.select_features.then(|| FeatureOptions {
                stale_limit: self.features.stale_limit,
                bins: self.features.bins,
            }),
            class_attr: self.class_attr.clone(),
            algorithm: Some(self.algo.to_config()?),
            evaluate: true,
            folds: self.folds,
            train_fraction: self.train_fraction,
            plots: parse_plots(&self.plot)?,
            out: self.out.out.clone(),
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PlotArgs {
    pub fn plots(&self) -> Result<Vec<PlotSpec>, ConfigError> {
        parse_plots(&self.plot)
    }
}
