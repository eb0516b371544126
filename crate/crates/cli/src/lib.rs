//! Command-line pipeline for steelclust: ingest or generate, aggregate,
//! ZeroR baseline, CFS feature selection, clustering, evaluation and plots.
//! Every command writes into an output directory and finishes with a
//! `manifest.txt` of SHA-256 digests.

pub mod args;
pub mod artifacts;
pub mod config;
pub mod pipeline;

pub use args::{Cli, Command};
pub use config::{AlgorithmConfig, ConfigError, DataSource, FeatureOptions, PipelineConfig, PlotSpec};
pub use pipeline::{read_dataset, run_pipeline, StageError, StageExt};

/// Executes one subcommand; the returned text goes to stdout.
pub fn run(command: &Command) -> Result<String, StageError> {
    let written = match command {
        Command::Generate(a) => run_pipeline(&stage_only(
            DataSource::Generate {
                rows: a.generator.rows,
                outliers: a.generator.outliers,
            },
            &a.out.out,
            a.seed,
        ))?,
        Command::Aggregate(a) => {
            let mut cfg = stage_only(a.input.source().stage("config")?, &a.out.out, 42);
            cfg.aggregate = true;
            run_pipeline(&cfg)?
        }
        Command::Baseline(a) => {
            let mut cfg = stage_only(a.input.source().stage("config")?, &a.out.out, a.seed);
            cfg.baseline = true;
            cfg.folds = a.folds;
            cfg.class_attr = a.class_attr.clone();
            run_pipeline(&cfg)?
        }
        Command::SelectFeatures(a) => {
            let mut cfg = stage_only(a.input.source().stage("config")?, &a.out.out, 42);
            cfg.class_attr = Some(a.class_attr.clone());
            cfg.features = Some(FeatureOptions {
                stale_limit: a.features.stale_limit,
                bins: a.features.bins,
            });
            run_pipeline(&cfg)?
        }
        Command::Cluster(a) => run_pipeline(&a.to_config().stage("config")?)?,
        Command::Pipeline(a) => run_pipeline(&a.to_config().stage("config")?)?,
        Command::Evaluate(a) => pipeline::run_on_assignments(
            &a.input.source().stage("config")?,
            a.class_attr.as_deref(),
            &a.assignments,
            &[],
            &a.out.out,
        )?,
        Command::Plot(a) => {
            let plots = a.plots().stage("config")?;
            pipeline::run_on_assignments(
                &a.input.source().stage("config")?,
                a.class_attr.as_deref(),
                &a.assignments,
                &plots,
                &a.out.out,
            )?
        }
        Command::Verify(a) => {
            let n = artifacts::verify(&a.dir).stage("verify")?;
            return Ok(format!("{n} artifacts verified in {}\n", a.dir.display()));
        }
    };
    let out = command.out_dir().expect("every writing command has --out");
    let mut text = format!("wrote {} artifacts and manifest.txt to {}\n", written.len(), out.display());
    for name in written {
        text.push_str(&format!("  {name}\n"));
    }
    Ok(text)
}

fn stage_only(source: DataSource, out: &std::path::Path, seed: u64) -> PipelineConfig {
    PipelineConfig {
        source,
        aggregate: false,
        baseline: false,
        features: None,
        class_attr: None,
        algorithm: None,
        evaluate: false,
        folds: 10,
        train_fraction: 1.0,
        plots: Vec::new(),
        out: out.to_path_buf(),
        seed,
    }
}
