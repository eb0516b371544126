use std::fmt;
use std::path::PathBuf;

use steelclust_core::hierarchical::Linkage;

/// A flag or flag combination rejected before any data is read.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv { path: PathBuf, schema: Option<PathBuf> },
    Generate { rows: usize, outliers: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmConfig {
    KMeans { k: usize, max_iter: usize },
    FarthestFirst { k: usize },
    /// `k = None` selects k by cross-validated log-likelihood up to `k_max`.
    Em { k: Option<usize>, k_max: usize, max_iter: usize },
    Dbscan { eps: f64, min_points: usize },
    Optics { eps: f64, min_points: usize },
    Cobweb { acuity: f64, cutoff: f64 },
    Agglomerative { k: usize, linkage: Linkage },
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::KMeans { .. } => "kmeans",
            AlgorithmConfig::FarthestFirst { .. } => "farthest-first",
            AlgorithmConfig::Em { .. } => "em",
            AlgorithmConfig::Dbscan { .. } => "dbscan",
            AlgorithmConfig::Optics { .. } => "optics",
            AlgorithmConfig::Cobweb { .. } => "cobweb",
            AlgorithmConfig::Agglomerative { .. } => "agglomerative",
        }
    }

    /// Algorithms that can place unseen rows, and so honour the train split.
    pub fn predicts(&self) -> bool {
        matches!(
            self,
            AlgorithmConfig::KMeans { .. } | AlgorithmConfig::FarthestFirst { .. } | AlgorithmConfig::Em { .. }
        )
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        match *self {
            AlgorithmConfig::KMeans { k, max_iter } => {
                if k < 1 {
                    return bad("--k must be at least 1".into());
                }
                if max_iter < 1 {
                    return bad("--max-iter must be at least 1".into());
                }
            }
            AlgorithmConfig::FarthestFirst { k } | AlgorithmConfig::Agglomerative { k, .. } => {
                if k < 1 {
                    return bad("--k must be at least 1".into());
                }
            }
            AlgorithmConfig::Em { k, k_max, max_iter } => {
                if k == Some(0) || k_max < 1 {
                    return bad("--k and --k-max must be at least 1".into());
                }
                if max_iter < 1 {
                    return bad("--max-iter must be at least 1".into());
                }
            }
            AlgorithmConfig::Dbscan { eps, min_points } | AlgorithmConfig::Optics { eps, min_points } => {
                if !(eps > 0.0) {
                    return bad(format!("--eps must be positive, got {eps}"));
                }
                if min_points < 1 {
                    return bad("--min-points must be at least 1".into());
                }
            }
            AlgorithmConfig::Cobweb { acuity, cutoff } => {
                if !(acuity > 0.0 && acuity.is_finite()) {
                    return bad(format!("--acuity must be positive and finite, got {acuity}"));
                }
                if !(cutoff >= 0.0 && cutoff.is_finite()) {
                    return bad(format!("--cutoff must be nonnegative and finite, got {cutoff}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureOptions {
    pub stale_limit: usize,
    pub bins: Option<usize>,
}

/// An `X:Y` axis pair, resolved against the schema once data is loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
}

impl PlotSpec {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.split_once(':') {
            Some((x, y)) if !x.is_empty() && !y.is_empty() && !y.contains(':') => Ok(PlotSpec {
                x: x.to_string(),
                y: y.to_string(),
            }),
            _ => Err(ConfigError(format!("--plot expects X:Y, got `{s}`"))),
        }
    }

    pub fn file_name(&self) -> String {
        let clean = |s: &str| -> String {
            s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
        };
        format!("scatter_{}_vs_{}.svg", clean(&self.x), clean(&self.y))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub source: DataSource,
    /// Aggregate sale-order lines before anything else.
    pub aggregate: bool,
    pub baseline: bool,
    pub features: Option<FeatureOptions>,
    pub class_attr: Option<String>,
    pub algorithm: Option<AlgorithmConfig>,
    /// Classes-to-clusters report (needs a class attribute) and WCSS.
    pub evaluate: bool,
    pub folds: usize,
    pub train_fraction: f64,
    pub plots: Vec<PlotSpec>,
    pub out: PathBuf,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.folds < 2 {
            return Err(ConfigError(format!("--folds must be at least 2, got {}", self.folds)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(ConfigError(format!(
                "--train-fraction must lie in (0, 1], got {}",
                self.train_fraction
            )));
        }
        if self.features.is_some() && self.class_attr.is_none() && !matches!(self.source, DataSource::Generate { .. }) {
            return Err(ConfigError("--select-features needs --class-attr".into()));
        }
        if let Some(f) = self.features {
            if f.bins == Some(0) {
                return Err(ConfigError("--bins must be at least 1".into()));
            }
        }
        if let DataSource::Generate { rows, outliers } = self.source {
            if outliers > rows {
                return Err(ConfigError(format!("--outliers {outliers} exceeds --rows {rows}")));
            }
            if self.aggregate {
                return Err(ConfigError("generated data is already aggregated; drop --aggregate".into()));
            }
        }
        if let Some(a) = &self.algorithm {
            a.validate()?;
        }
        Ok(())
    }
}
