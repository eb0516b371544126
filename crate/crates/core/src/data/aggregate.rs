use std::collections::HashMap;

use super::{AttributeSpec, Dataset, Instance, Value};
use crate::error::{Error, Result};

/// Column names of the aggregated sales extract, in schema order.
pub const SALES_ATTRIBUTES: [&str; 6] = [
    "Product_CD",
    "Prod_Desc",
    "Customer_CD",
    "No_of_Records",
    "Quantity_sold",
    "Sales_value",
];

/// The six-attribute aggregated schema with the given nominal domains.
pub fn sales_schema(products: Vec<String>, descriptions: Vec<String>, customers: Vec<String>) -> Vec<AttributeSpec> {
    vec![
        AttributeSpec::nominal(SALES_ATTRIBUTES[0], products),
        AttributeSpec::nominal(SALES_ATTRIBUTES[1], descriptions),
        AttributeSpec::nominal(SALES_ATTRIBUTES[2], customers),
        AttributeSpec::numeric(SALES_ATTRIBUTES[3], "count"),
        AttributeSpec::numeric(SALES_ATTRIBUTES[4], "tons"),
        AttributeSpec::numeric(SALES_ATTRIBUTES[5], "INR"),
    ]
}

struct Interner {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            symbols: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn intern(&mut self, s: String) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        let i = self.symbols.len();
        self.index.insert(s.clone(), i);
        self.symbols.push(s);
        i
    }
}

struct Group {
    product: usize,
    desc: usize,
    customer: usize,
    records: usize,
    quantity: f64,
    value: f64,
}

/// Collapses sale-order lines into one row per (product, customer) pair.
///
/// Required columns: `product_cd`, `prod_desc`, `customer_cd`, `quantity`,
/// `value`. The description kept for a product is the first one seen.
pub fn aggregate_sales(raw: &Dataset) -> Result<Dataset> {
    let col = |name: &str| {
        raw.attribute_index(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let product_col = col("product_cd")?;
    let desc_col = col("prod_desc")?;
    let customer_col = col("customer_cd")?;
    let qty_col = col("quantity")?;
    let value_col = col("value")?;
    for c in [qty_col, value_col] {
        if !raw.schema()[c].is_numeric() {
            return Err(Error::NotNumeric(raw.schema()[c].name.clone()));
        }
    }

    let mut products = Interner::new();
    let mut descs = Interner::new();
    let mut customers = Interner::new();
    let mut product_desc: HashMap<usize, usize> = HashMap::new();
    let mut group_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();

    for row in raw.rows() {
        let p = products.intern(raw.render_value(product_col, row.values[product_col]));
        let c = customers.intern(raw.render_value(customer_col, row.values[customer_col]));
        let desc_text = raw.render_value(desc_col, row.values[desc_col]);
        let desc = *product_desc.entry(p).or_insert_with(|| descs.intern(desc_text));
        let qty = row.numeric(qty_col);
        let value = row.numeric(value_col);
        let g = *group_of.entry((p, c)).or_insert_with(|| {
            groups.push(Group {
                product: p,
                desc,
                customer: c,
                records: 0,
                quantity: 0.0,
                value: 0.0,
            });
            groups.len() - 1
        });
        let group = &mut groups[g];
        group.records += 1;
        group.quantity += qty;
        group.value += value;
    }

    let rows = groups
        .iter()
        .map(|g| {
            Instance::new(vec![
                Value::Nominal(g.product),
                Value::Nominal(g.desc),
                Value::Nominal(g.customer),
                Value::Numeric(g.records as f64),
                Value::Numeric(g.quantity),
                Value::Numeric(g.value),
            ])
        })
        .collect();
    Dataset::new(
        sales_schema(products.symbols, descs.symbols, customers.symbols),
        rows,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_csv, ColumnType};
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeMap;

    const HINTS: [ColumnType; 5] = [
        ColumnType::Nominal,
        ColumnType::Nominal,
        ColumnType::Nominal,
        ColumnType::Numeric,
        ColumnType::Numeric,
    ];

    #[test]
    fn hand_sum() {
        let raw = parse_csv(
            "product_cd,prod_desc,customer_cd,quantity,value\nP1,d,C1,10,100\nP1,d,C1,5,50\nP1,d,C2,1,9\n",
            Some(&HINTS),
        )
        .unwrap();
        let agg = aggregate_sales(&raw).unwrap();
        let names: Vec<&str> = agg.schema().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, SALES_ATTRIBUTES);
        assert_eq!(agg.len(), 2);
        let text = crate::data::serialize_csv(&agg);
        assert_eq!(
            text,
            "Product_CD,Prod_Desc,Customer_CD,No_of_Records,Quantity_sold,Sales_value\nP1,d,C1,2,15,150\nP1,d,C2,1,1,9\n"
        );
    }

    #[test]
    fn empty_input_keeps_schema() {
        let raw = parse_csv("product_cd,prod_desc,customer_cd,quantity,value\n", Some(&HINTS)).unwrap();
        let agg = aggregate_sales(&raw).unwrap();
        assert!(agg.is_empty());
        assert_eq!(agg.n_attributes(), 6);
    }

    #[test]
    fn missing_column_is_named() {
        let raw = parse_csv("product_cd,prod_desc,customer_cd,quantity\nP,d,C,1\n", None).unwrap();
        assert_eq!(aggregate_sales(&raw), Err(Error::MissingColumn("value".into())));
    }

    #[test]
    fn totals_match_group_by_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut text = String::from("product_cd,prod_desc,customer_cd,quantity,value\n");
        let mut oracle: BTreeMap<(String, String), (usize, f64, f64)> = BTreeMap::new();
        let (mut q_total, mut v_total) = (0.0, 0.0);
        for _ in 0..1000 {
            let p = format!("P{}", rng.random_range(0..10));
            let c = format!("C{}", rng.random_range(0..10));
            let q: f64 = (rng.random_range(1..1000) as f64) / 8.0;
            let v: f64 = (rng.random_range(1..100_000) as f64) / 4.0;
            q_total += q;
            v_total += v;
            let e = oracle.entry((p.clone(), c.clone())).or_default();
            e.0 += 1;
            e.1 += q;
            e.2 += v;
            text.push_str(&format!("{p},desc {p},{c},{q},{v}\n"));
        }
        let agg = aggregate_sales(&parse_csv(&text, Some(&HINTS)).unwrap()).unwrap();
        assert_eq!(agg.len(), oracle.len());
        let records: f64 = agg.numeric_column(3).iter().sum();
        assert_eq!(records, 1000.0);
        let q: f64 = agg.numeric_column(4).iter().sum();
        let v: f64 = agg.numeric_column(5).iter().sum();
        assert!((q - q_total).abs() <= 1e-9 * q_total);
        assert!((v - v_total).abs() <= 1e-9 * v_total);
        for row in agg.rows() {
            let key = (
                agg.render_value(0, row.values[0]),
                agg.render_value(2, row.values[2]),
            );
            let (n, qs, vs) = oracle[&key];
            assert_eq!(row.numeric(3), n as f64);
            assert!((row.numeric(4) - qs).abs() < 1e-9 * qs.max(1.0));
            assert!((row.numeric(5) - vs).abs() < 1e-9 * vs.max(1.0));
        }
    }
}
