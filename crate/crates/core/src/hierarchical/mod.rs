//! Hierarchical clustering: incremental concept trees and agglomerative
//! dendrograms.

pub mod agglomerative;
pub mod cobweb;

pub use agglomerative::{agglomerative, agglomerative_in, Dendrogram, Linkage, Merge};
pub use cobweb::{
    category_utility, cobweb_fit, cobweb_fit_with_budget, AttrStats, CobwebNode, CobwebTree, DEFAULT_ACUITY,
    DEFAULT_CUTOFF, DEFAULT_SEED, DEFAULT_VISIT_BUDGET,
};
