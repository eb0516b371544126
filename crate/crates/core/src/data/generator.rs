//! Seeded synthetic stand-in for the aggregated sales extract.
//!
//! Rows come from a finite mixture of segments. Each segment draws numeric
//! attributes from zero-truncated normals and nominal codes from its own
//! pools. Product codes follow the 15-digit plant layout
//! `mill(1) group(2) size(3) grade(5) length(4)`.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use super::{sales_schema, AttributeSpec, Dataset, Instance, Value};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Name of the appended class column holding the generating segment.
pub const SEGMENT_ATTRIBUTE: &str = "Segment";
/// Segment label given to appended outlier rows.
pub const OUTLIER_SEGMENT: &str = "outlier";

const OUTLIER_PRODUCT: &str = "055000800000011";
const OUTLIER_DESC: &str = "BFG SLAG (EXPORT)";
const PRODUCT_GROUPS: [&str; 8] = [
    "TMT Rebar",
    "TMT Rebar Coil",
    "WR Coil",
    "Angle",
    "Channel",
    "Beam",
    "Billet",
    "Pig Iron",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericParams {
    pub mean: f64,
    pub std: f64,
}

impl NumericParams {
    pub const fn new(mean: f64, std: f64) -> Self {
        NumericParams { mean, std }
    }
}

/// A pool of `size` pre-minted codes. Each draw reuses a pool code with
/// probability `reuse`, otherwise mints a fresh unique code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodePool {
    pub size: usize,
    pub reuse: f64,
}

impl CodePool {
    /// Every draw yields a never-seen code.
    pub const UNIQUE: CodePool = CodePool { size: 0, reuse: 0.0 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub name: String,
    pub weight: f64,
    pub records: NumericParams,
    pub quantity: NumericParams,
    pub value: NumericParams,
    pub products: CodePool,
    /// Segment-private customer pool; `None` draws from the shared pool.
    pub customers: Option<CodePool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub segments: Vec<SegmentSpec>,
    /// Customer pool shared by every segment without a private one.
    pub shared_customers: CodePool,
    pub outlier_count: usize,
    /// Total rows including outliers.
    pub total_rows: usize,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Four segments with the per-cluster means and standard deviations of
    /// the steel-sales EM run, weighted by its clustered-instance counts.
    pub fn table5(total_rows: usize, outlier_count: usize, seed: u64) -> Self {
        let counts = [7451.0, 765.0, 6142.0, 4543.0];
        let total: f64 = counts.iter().sum();
        let params = [
            (
                NumericParams::new(1.143, 0.35),
                NumericParams::new(6.09, 3.65),
                NumericParams::new(225_617.82, 135_610.07),
            ),
            (
                NumericParams::new(17.95, 14.32),
                NumericParams::new(1929.19, 15_045.98),
                NumericParams::new(27_113_906.80, 32_195_752.77),
            ),
            (
                NumericParams::new(2.29, 1.19),
                NumericParams::new(26.99, 12.07),
                NumericParams::new(986_642.45, 438_024.16),
            ),
            (
                NumericParams::new(5.25, 3.26),
                NumericParams::new(113.27, 76.72),
                NumericParams::new(4_058_298.08, 2_722_933.25),
            ),
        ];
        let segments = counts
            .iter()
            .zip(params)
            .enumerate()
            .map(|(i, (&c, (records, quantity, value)))| SegmentSpec {
                name: format!("segment{i}"),
                weight: c / total,
                records,
                quantity,
                value,
                products: CodePool { size: 20, reuse: 0.95 },
                customers: None,
            })
            .collect();
        GeneratorConfig {
            segments,
            shared_customers: CodePool { size: 400, reuse: 0.9 },
            outlier_count,
            total_rows,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidParameter("generator needs at least one segment".into()));
        }
        let sum: f64 = self.segments.iter().map(|s| s.weight).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "mixing weights sum to {sum}, expected 1"
            )));
        }
        for s in &self.segments {
            if !(s.weight >= 0.0) {
                return Err(Error::InvalidParameter(format!("segment `{}`: negative weight", s.name)));
            }
            for p in [s.records, s.quantity, s.value] {
                if !p.mean.is_finite() || !(p.std >= 0.0) || !p.std.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "segment `{}`: bad normal parameters {p:?}",
                        s.name
                    )));
                }
            }
            for pool in std::iter::once(s.products).chain(s.customers) {
                check_pool(pool)?;
            }
        }
        check_pool(self.shared_customers)?;
        if self.total_rows < self.outlier_count {
            return Err(Error::InvalidParameter(format!(
                "total_rows {} is smaller than outlier_count {}",
                self.total_rows, self.outlier_count
            )));
        }
        Ok(())
    }
}

fn check_pool(p: CodePool) -> Result<()> {
    if !(0.0..=1.0).contains(&p.reuse) {
        return Err(Error::InvalidParameter(format!("pool reuse {} outside [0,1]", p.reuse)));
    }
    if p.reuse > 0.0 && p.size == 0 {
        return Err(Error::InvalidParameter("pool with reuse > 0 needs size > 0".into()));
    }
    Ok(())
}

/// Interned symbols with a uniqueness guard.
struct Symbols {
    names: Vec<String>,
    seen: HashSet<String>,
}

impl Symbols {
    fn new() -> Self {
        Symbols {
            names: Vec::new(),
            seen: HashSet::new(),
        }
    }

    fn add(&mut self, s: String) -> usize {
        debug_assert!(!self.seen.contains(&s));
        self.seen.insert(s.clone());
        self.names.push(s);
        self.names.len() - 1
    }

    fn index_of(&self, s: &str) -> Option<usize> {
        self.seen.contains(s).then(|| self.names.iter().position(|n| n == s).unwrap())
    }
}

struct CodeMinter {
    products: Symbols,
    descs: Symbols,
    // product index -> desc index
    product_desc: Vec<usize>,
    customers: Symbols,
}

impl CodeMinter {
    fn product(&mut self, rng: &mut ChaCha8Rng, mill: u32) -> usize {
        loop {
            let group = rng.random_range(0..PRODUCT_GROUPS.len());
            let size = rng.random_range(6..250u32);
            let grade = rng.random_range(0..100_000u32);
            let length = rng.random_range(0..10_000u32);
            let code = format!("{mill}{:02}{size:03}{grade:05}{length:04}", group + 1);
            if self.products.seen.contains(&code) {
                continue;
            }
            let desc = format!("{} {size} G{grade:05}", PRODUCT_GROUPS[group]);
            let d = self.descs.index_of(&desc).unwrap_or_else(|| self.descs.add(desc));
            self.product_desc.push(d);
            return self.products.add(code);
        }
    }

    fn customer(&mut self, rng: &mut ChaCha8Rng) -> usize {
        loop {
            let region = rng.random_range(0..1000u32);
            let letter = (b'A' + rng.random_range(0..26u8)) as char;
            let serial = rng.random_range(0..1_000_000u32);
            let code = format!("{region:03}{letter}{serial:06}");
            if !self.customers.seen.contains(&code) {
                return self.customers.add(code);
            }
        }
    }
}

struct Pool {
    spec: CodePool,
    codes: Vec<usize>,
}

impl Pool {
    fn draw(&self, rng: &mut ChaCha8Rng, mint: impl FnOnce(&mut ChaCha8Rng) -> usize) -> usize {
        if !self.codes.is_empty() && rng.random_bool(self.spec.reuse) {
            self.codes[rng.random_range(0..self.codes.len())]
        } else {
            mint(rng)
        }
    }
}

fn truncated_normal(rng: &mut ChaCha8Rng, p: NumericParams) -> f64 {
    if p.std == 0.0 {
        return p.mean.max(0.0);
    }
    let normal = Normal::new(p.mean, p.std).expect("validated std");
    for _ in 0..10_000 {
        let x = normal.sample(rng);
        if x >= 0.0 {
            return x;
        }
    }
    0.0
}

/// Generates `total_rows` rows: `total_rows - outlier_count` segment rows
/// followed by the outliers. The last attribute is the nominal
/// [`SEGMENT_ATTRIBUTE`] column, designated as the class.
pub fn generate_sales_dataset(cfg: &GeneratorConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, Stream::Generator);
    let mut minter = CodeMinter {
        products: Symbols::new(),
        descs: Symbols::new(),
        product_desc: Vec::new(),
        customers: Symbols::new(),
    };

    let mut product_pools = Vec::with_capacity(cfg.segments.len());
    let mut customer_pools = Vec::with_capacity(cfg.segments.len());
    for (i, seg) in cfg.segments.iter().enumerate() {
        let mill = (i as u32 % 9) + 1;
        let codes = (0..seg.products.size).map(|_| minter.product(&mut rng, mill)).collect();
        product_pools.push(Pool { spec: seg.products, codes });
        customer_pools.push(seg.customers.map(|spec| Pool {
            spec,
            codes: (0..spec.size).map(|_| minter.customer(&mut rng)).collect(),
        }));
    }
    let shared = Pool {
        spec: cfg.shared_customers,
        codes: (0..cfg.shared_customers.size)
            .map(|_| minter.customer(&mut rng))
            .collect(),
    };

    let chooser = WeightedIndex::new(cfg.segments.iter().map(|s| s.weight))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let n_regular = cfg.total_rows - cfg.outlier_count;
    let mut rows = Vec::with_capacity(cfg.total_rows);
    for _ in 0..n_regular {
        let s = chooser.sample(&mut rng);
        let seg = &cfg.segments[s];
        let mill = (s as u32 % 9) + 1;
        let product = product_pools[s].draw(&mut rng, |r| minter.product(r, mill));
        let customer_pool = customer_pools[s].as_ref().unwrap_or(&shared);
        let customer = customer_pool.draw(&mut rng, |r| minter.customer(r));
        let desc = minter.product_desc[product];
        rows.push(Instance::new(vec![
            Value::Nominal(product),
            Value::Nominal(desc),
            Value::Nominal(customer),
            Value::Numeric(truncated_normal(&mut rng, seg.records)),
            Value::Numeric(truncated_normal(&mut rng, seg.quantity)),
            Value::Numeric(truncated_normal(&mut rng, seg.value)),
            Value::Nominal(s),
        ]));
    }

    if cfg.outlier_count > 0 {
        let max_mean = |f: fn(&SegmentSpec) -> f64| {
            cfg.segments.iter().map(f).fold(0.0, f64::max)
        };
        let scales = [
            max_mean(|s| s.records.mean),
            max_mean(|s| s.quantity.mean),
            max_mean(|s| s.value.mean),
        ];
        let product = minter.products.add(OUTLIER_PRODUCT.to_string());
        let desc = minter.descs.add(OUTLIER_DESC.to_string());
        for _ in 0..cfg.outlier_count {
            let customer = minter.customer(&mut rng);
            let mut values = vec![
                Value::Nominal(product),
                Value::Nominal(desc),
                Value::Nominal(customer),
            ];
            for scale in scales {
                let factor = 20.0 + rng.random_range(0.0..5.0);
                values.push(Value::Numeric(factor * scale.max(1.0)));
            }
            values.push(Value::Nominal(cfg.segments.len()));
            rows.push(Instance::new(values));
        }
    }

    let mut schema = sales_schema(minter.products.names, minter.descs.names, minter.customers.names);
    let mut segment_names: Vec<String> = cfg.segments.iter().map(|s| s.name.clone()).collect();
    segment_names.push(OUTLIER_SEGMENT.to_string());
    schema.push(AttributeSpec::nominal(SEGMENT_ATTRIBUTE, segment_names));
    let class = schema.len() - 1;
    Dataset::new(schema, rows, Some(class))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::serialize_csv;

    #[test]
    fn empty_config() {
        let d = generate_sales_dataset(&GeneratorConfig::table5(0, 0, 1)).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.n_attributes(), 7);
        assert_eq!(d.class_index(), Some(6));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = serialize_csv(&generate_sales_dataset(&GeneratorConfig::table5(500, 2, 9)).unwrap());
        let b = serialize_csv(&generate_sales_dataset(&GeneratorConfig::table5(500, 2, 9)).unwrap());
        let c = serialize_csv(&generate_sales_dataset(&GeneratorConfig::table5(500, 2, 10)).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(generate_sales_dataset(&GeneratorConfig::table5(1, 2, 0)).is_err());
        let mut cfg = GeneratorConfig::table5(10, 0, 0);
        cfg.segments[0].weight += 0.01;
        assert!(generate_sales_dataset(&cfg).is_err());
        let mut cfg = GeneratorConfig::table5(10, 0, 0);
        cfg.segments[1].value.std = -1.0;
        assert!(generate_sales_dataset(&cfg).is_err());
    }

    #[test]
    fn product_codes_have_fifteen_digits() {
        let d = generate_sales_dataset(&GeneratorConfig::table5(300, 3, 4)).unwrap();
        for code in d.schema()[0].domain().unwrap() {
            assert_eq!(code.len(), 15, "{code}");
            assert!(code.bytes().all(|b| b.is_ascii_digit()));
        }
    }

    #[test]
    fn outliers_dwarf_segment_means() {
        let cfg = GeneratorConfig::table5(200, 2, 4);
        let d = generate_sales_dataset(&cfg).unwrap();
        let max_value_mean = cfg.segments.iter().map(|s| s.value.mean).fold(0.0, f64::max);
        for row in &d.rows()[198..] {
            assert!(row.numeric(5) >= 20.0 * max_value_mean);
            assert_eq!(row.nominal(6), cfg.segments.len());
        }
        for row in &d.rows()[..198] {
            assert!(row.nominal(6) < cfg.segments.len());
            assert!(row.numeric(3) >= 0.0 && row.numeric(4) >= 0.0 && row.numeric(5) >= 0.0);
        }
    }

    #[test]
    fn unique_pools_never_repeat() {
        let mut cfg = GeneratorConfig::table5(100, 0, 2);
        for s in &mut cfg.segments {
            s.products = CodePool::UNIQUE;
        }
        cfg.shared_customers = CodePool::UNIQUE;
        let d = generate_sales_dataset(&cfg).unwrap();
        assert_eq!(d.schema()[0].domain().unwrap().len(), 100);
        assert_eq!(d.schema()[2].domain().unwrap().len(), 100);
    }
}
