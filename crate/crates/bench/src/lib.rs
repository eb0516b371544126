//! Fixtures shared by the benchmarks.

use steelclust_core::data::{generate_sales_dataset, GeneratorConfig};
use steelclust_core::Dataset;

/// Seeded synthetic sales rows with the product and customer codes dropped,
/// leaving the numeric measures.
pub fn sales(rows: usize, seed: u64) -> Dataset {
    let d = generate_sales_dataset(&GeneratorConfig::table5(rows, 0, seed)).expect("generator config is valid");
    let keep: Vec<usize> = (0..d.schema().len()).filter(|&a| d.schema()[a].is_numeric()).collect();
    d.project(&keep).expect("numeric columns exist")
}
