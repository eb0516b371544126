//! Clustering toolkit for mixed nominal/numeric sales data.
//!
//! Covers ingestion and aggregation of sale-order lines, a ZeroR baseline
//! with regression metrics, correlation-based feature selection, partition
//! (k-means, farthest-first, density wrapper), EM mixture, density-based
//! (DBSCAN, OPTICS) and hierarchical (COBWEB, agglomerative) clustering,
//! classes-to-clusters evaluation and SVG scatter plots.

pub mod assignment;
pub mod baseline;
pub mod data;
pub mod density;
pub mod em;
pub mod error;
pub mod evaluation;
pub mod feature_selection;
pub mod format;
pub mod hierarchical;
pub mod mixture;
pub mod partition;
pub mod plot;
pub mod rng;
pub mod stats;

pub use assignment::{ClusterAssignment, Label};
pub use data::{
    compute_ranges, distance, AttributeKind, AttributeSpec, Dataset, DistanceSpace, Instance, Ranges,
    Value,
};
pub use error::{Error, Result};
