//! Dataset model: attribute schema, instances, ranges and the mixed-type
//! distance used by every distance-based clusterer.

mod aggregate;
mod csv;
mod distance;
mod generator;
mod split;

pub use self::aggregate::{aggregate_sales, sales_schema, SALES_ATTRIBUTES};
pub use self::csv::{parse_csv, parse_csv_with_schema, parse_schema, serialize_csv, serialize_schema, ColumnType};
pub use self::distance::{distance, DistanceSpace};
pub use self::generator::{
    generate_sales_dataset, CodePool, GeneratorConfig, NumericParams, SegmentSpec, OUTLIER_SEGMENT,
    SEGMENT_ATTRIBUTE,
};
pub use self::split::{split_indices, split_train_test};

use std::collections::HashSet;

use crate::error::{Error, Result};

/// The kind of an attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    /// Ordered symbol domain. Instances store indices into it.
    Nominal { domain: Vec<String> },
    Numeric { units: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn nominal<S: Into<String>>(name: S, domain: Vec<String>) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Nominal { domain },
        }
    }

    pub fn numeric<S: Into<String>, U: Into<String>>(name: S, units: U) -> Self {
        AttributeSpec {
            name: name.into(),
            kind: AttributeKind::Numeric {
                units: units.into(),
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric { .. })
    }

    pub fn is_nominal(&self) -> bool {
        !self.is_numeric()
    }

    pub fn domain(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal { domain } => Some(domain),
            AttributeKind::Numeric { .. } => None,
        }
    }

    pub fn units(&self) -> Option<&str> {
        match &self.kind {
            AttributeKind::Numeric { units } => Some(units),
            AttributeKind::Nominal { .. } => None,
        }
    }

    /// Index of `symbol` in the nominal domain.
    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.domain()?.iter().position(|s| s == symbol)
    }
}

/// A single attribute value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    /// Index into the attribute's nominal domain.
    Nominal(usize),
    Numeric(f64),
}

impl Value {
    pub fn as_numeric(&self) -> Option<f64> {
        match *self {
            Value::Numeric(x) => Some(x),
            Value::Nominal(_) => None,
        }
    }

    pub fn as_nominal(&self) -> Option<usize> {
        match *self {
            Value::Nominal(i) => Some(i),
            Value::Numeric(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Value>,
}

impl Instance {
    pub fn new(values: Vec<Value>) -> Self {
        Instance { values }
    }

    pub fn numeric(&self, attr: usize) -> f64 {
        self.values[attr]
            .as_numeric()
            .expect("attribute is not numeric")
    }

    pub fn nominal(&self, attr: usize) -> usize {
        self.values[attr]
            .as_nominal()
            .expect("attribute is not nominal")
    }
}

/// Validated schema plus rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<AttributeSpec>,
    rows: Vec<Instance>,
    class_index: Option<usize>,
}

impl Dataset {
    /// Builds a dataset, checking every schema and row invariant.
    pub fn new(
        schema: Vec<AttributeSpec>,
        rows: Vec<Instance>,
        class_index: Option<usize>,
    ) -> Result<Self> {
        validate_schema(&schema)?;
        if let Some(c) = class_index {
            if c >= schema.len() {
                return Err(Error::InvalidSchema(format!(
                    "class index {c} out of range for {} attributes",
                    schema.len()
                )));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            check_row(&schema, row, r)?;
        }
        Ok(Dataset {
            schema,
            rows,
            class_index,
        })
    }

    pub fn empty(schema: Vec<AttributeSpec>) -> Result<Self> {
        Dataset::new(schema, Vec::new(), None)
    }

    pub fn schema(&self) -> &[AttributeSpec] {
        &self.schema
    }

    pub fn rows(&self) -> &[Instance] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Instance {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.schema.len()
    }

    pub fn class_index(&self) -> Option<usize> {
        self.class_index
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a.name == name)
    }

    /// Same data with a different class designation.
    pub fn with_class_index(mut self, class_index: Option<usize>) -> Result<Self> {
        if let Some(c) = class_index {
            if c >= self.schema.len() {
                return Err(Error::InvalidSchema(format!("class index {c} out of range")));
            }
        }
        self.class_index = class_index;
        Ok(self)
    }

    pub fn with_class_name(self, name: &str) -> Result<Self> {
        let idx = self
            .attribute_index(name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        self.with_class_index(Some(idx))
    }

    /// Attribute positions used for distance by default: everything but the class.
    pub fn active_attributes(&self) -> Vec<usize> {
        (0..self.schema.len())
            .filter(|&i| Some(i) != self.class_index)
            .collect()
    }

    pub fn numeric_column(&self, attr: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.numeric(attr)).collect()
    }

    pub fn nominal_column(&self, attr: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r.nominal(attr)).collect()
    }

    /// Rows at the given positions, schema unchanged.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            class_index: self.class_index,
        }
    }

    /// Keeps only the listed attributes (in the given order). The class
    /// attribute survives the projection only if listed.
    pub fn project(&self, attrs: &[usize]) -> Result<Dataset> {
        let schema: Vec<AttributeSpec> = attrs
            .iter()
            .map(|&a| {
                self.schema.get(a).cloned().ok_or_else(|| {
                    Error::InvalidParameter(format!("attribute {a} out of range"))
                })
            })
            .collect::<Result<_>>()?;
        let rows = self
            .rows
            .iter()
            .map(|r| Instance::new(attrs.iter().map(|&a| r.values[a]).collect()))
            .collect();
        let class_index = self
            .class_index
            .and_then(|c| attrs.iter().position(|&a| a == c));
        Dataset::new(schema, rows, class_index)
    }

    /// Renders a value as text: the symbol for nominal, shortest round-trip
    /// decimal for numeric.
    pub fn render_value(&self, attr: usize, value: Value) -> String {
        match (value, &self.schema[attr].kind) {
            (Value::Nominal(i), AttributeKind::Nominal { domain }) => domain[i].clone(),
            (Value::Numeric(x), _) => format!("{x}"),
            (Value::Nominal(i), _) => i.to_string(),
        }
    }
}

fn validate_schema(schema: &[AttributeSpec]) -> Result<()> {
    let mut names = HashSet::new();
    for attr in schema {
        if attr.name.is_empty() {
            return Err(Error::InvalidSchema("attribute name is empty".into()));
        }
        if !names.insert(attr.name.as_str()) {
            return Err(Error::InvalidSchema(format!(
                "duplicate attribute name `{}`",
                attr.name
            )));
        }
        if let AttributeKind::Nominal { domain } = &attr.kind {
            let mut seen = HashSet::new();
            for s in domain {
                if !seen.insert(s.as_str()) {
                    return Err(Error::InvalidSchema(format!(
                        "duplicate symbol `{s}` in domain of `{}`",
                        attr.name
                    )));
                }
            }
        }
    }
    Ok(())
}

fn check_row(schema: &[AttributeSpec], row: &Instance, r: usize) -> Result<()> {
    if row.values.len() != schema.len() {
        return Err(Error::RaggedRow {
            row: r,
            expected: schema.len(),
            found: row.values.len(),
        });
    }
    for (attr, value) in schema.iter().zip(&row.values) {
        match (&attr.kind, *value) {
            (AttributeKind::Numeric { .. }, Value::Numeric(x)) => {
                if !x.is_finite() {
                    return Err(Error::NonFinite {
                        row: r,
                        column: attr.name.clone(),
                        value: x.to_string(),
                    });
                }
            }
            (AttributeKind::Nominal { domain }, Value::Nominal(i)) => {
                if i >= domain.len() {
                    return Err(Error::UnknownSymbol {
                        row: r,
                        column: attr.name.clone(),
                        value: i.to_string(),
                    });
                }
            }
            (AttributeKind::Numeric { .. }, _) => return Err(Error::NotNumeric(attr.name.clone())),
            (AttributeKind::Nominal { .. }, _) => return Err(Error::NotNominal(attr.name.clone())),
        }
    }
    Ok(())
}

/// Observed min/max per numeric attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranges {
    bounds: Vec<Option<(f64, f64)>>,
}

impl Ranges {
    /// `None` at nominal attributes and everywhere when the dataset is empty.
    pub fn bounds(&self) -> &[Option<(f64, f64)>] {
        &self.bounds
    }

    pub fn get(&self, attr: usize) -> Option<(f64, f64)> {
        self.bounds.get(attr).copied().flatten()
    }

    /// True when no numeric attribute has an observed range.
    pub fn is_empty(&self) -> bool {
        self.bounds.iter().all(Option::is_none)
    }

    /// Ranges of width one starting at zero: distances in raw units.
    pub fn unit(schema: &[AttributeSpec]) -> Self {
        Ranges {
            bounds: schema
                .iter()
                .map(|a| a.is_numeric().then_some((0.0, 1.0)))
                .collect(),
        }
    }

    pub fn from_bounds(bounds: Vec<Option<(f64, f64)>>) -> Self {
        Ranges { bounds }
    }

    pub fn width(&self, attr: usize) -> f64 {
        self.get(attr).map_or(0.0, |(lo, hi)| hi - lo)
    }
}

pub fn compute_ranges(d: &Dataset) -> Ranges {
    let bounds = d
        .schema()
        .iter()
        .enumerate()
        .map(|(a, spec)| {
            if !spec.is_numeric() {
                return None;
            }
            d.rows().iter().map(|r| r.numeric(a)).fold(None, |acc, x| match acc {
                None => Some((x, x)),
                Some((lo, hi)) => Some((f64::min(lo, x), f64::max(hi, x))),
            })
        })
        .collect();
    Ranges { bounds }
}
