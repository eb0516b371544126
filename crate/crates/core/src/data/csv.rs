//! CSV ingestion and emission (RFC-4180 quoting, mandatory header) plus the
//! sidecar schema format: one CSV line per column, `name,numeric,units` or
//! `name,nominal,sym1,sym2,...`.

use std::collections::HashMap;

use super::{AttributeKind, AttributeSpec, Dataset, Instance, Value};
use crate::error::{Error, Result};

/// Per-column type hint for [`parse_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Nominal,
    Numeric,
}

struct RawTable {
    header: Vec<String>,
    // (line number, cells)
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(text: &str) -> Result<RawTable> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Csv("missing header row".into()));
    }
    let mut rows: Vec<(u64, Vec<String>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: line as usize,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    for (line, cells) in &rows {
        if let Some(c) = cells.iter().position(String::is_empty) {
            return Err(Error::MissingValue {
                row: *line as usize,
                column: header[c].clone(),
            });
        }
    }
    Ok(RawTable { header, rows })
}

fn parse_number(cell: &str, line: u64, column: &str) -> Result<f64> {
    let x: f64 = cell.trim().parse().map_err(|_| {
        Error::Parse(format!("line {line}, column `{column}`: `{cell}` is not a number"))
    })?;
    if !x.is_finite() {
        return Err(Error::NonFinite {
            row: line as usize,
            column: column.to_string(),
            value: cell.to_string(),
        });
    }
    Ok(x)
}

/// Parses CSV text into a dataset. Without hints a column is numeric when
/// every cell parses as a real number, nominal otherwise (domain in order of
/// first appearance).
pub fn parse_csv(text: &str, hints: Option<&[ColumnType]>) -> Result<Dataset> {
    let table = read_table(text)?;
    if let Some(h) = hints {
        if h.len() != table.header.len() {
            return Err(Error::InvalidParameter(format!(
                "{} type hints for {} columns",
                h.len(),
                table.header.len()
            )));
        }
    } else if table.rows.is_empty() {
        return Err(Error::CannotInferTypes);
    }
    let kinds: Vec<ColumnType> = match hints {
        Some(h) => h.to_vec(),
        None => (0..table.header.len())
            .map(|c| {
                let all_numeric = table
                    .rows
                    .iter()
                    .all(|(_, cells)| cells[c].trim().parse::<f64>().is_ok());
                if all_numeric {
                    ColumnType::Numeric
                } else {
                    ColumnType::Nominal
                }
            })
            .collect(),
    };
    let schema: Vec<AttributeSpec> = table
        .header
        .iter()
        .zip(&kinds)
        .map(|(name, kind)| match kind {
            ColumnType::Numeric => AttributeSpec::numeric(name.clone(), ""),
            ColumnType::Nominal => AttributeSpec::nominal(name.clone(), Vec::new()),
        })
        .collect();
    build(table, schema, false)
}

/// Parses CSV text against a declared schema. Header names must match the
/// schema in order. A nominal attribute with an empty declared domain takes
/// its domain from the data; a nonempty one is enforced.
pub fn parse_csv_with_schema(text: &str, schema: &[AttributeSpec]) -> Result<Dataset> {
    let table = read_table(text)?;
    let names: Vec<&str> = schema.iter().map(|a| a.name.as_str()).collect();
    if table.header.iter().map(String::as_str).ne(names.iter().copied()) {
        return Err(Error::InvalidSchema(format!(
            "header {:?} does not match schema {:?}",
            table.header, names
        )));
    }
    build(table, schema.to_vec(), true)
}

fn build(table: RawTable, mut schema: Vec<AttributeSpec>, enforce_domains: bool) -> Result<Dataset> {
    let n_cols = schema.len();
    let mut lookups: Vec<HashMap<String, usize>> = schema
        .iter()
        .map(|a| {
            a.domain()
                .map(|d| d.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
                .unwrap_or_default()
        })
        .collect();
    let fixed: Vec<bool> = schema
        .iter()
        .map(|a| enforce_domains && a.domain().is_some_and(|d| !d.is_empty()))
        .collect();
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, cells) in &table.rows {
        let mut values = Vec::with_capacity(n_cols);
        for (c, cell) in cells.iter().enumerate() {
            let value = match &mut schema[c].kind {
                AttributeKind::Numeric { .. } => {
                    Value::Numeric(parse_number(cell, *line, &table.header[c])?)
                }
                AttributeKind::Nominal { domain } => match lookups[c].get(cell.as_str()) {
                    Some(&i) => Value::Nominal(i),
                    None if fixed[c] => {
                        return Err(Error::UnknownSymbol {
                            row: *line as usize,
                            column: table.header[c].clone(),
                            value: cell.clone(),
                        })
                    }
                    None => {
                        let i = domain.len();
                        domain.push(cell.clone());
                        lookups[c].insert(cell.clone(), i);
                        Value::Nominal(i)
                    }
                },
            };
            values.push(value);
        }
        rows.push(Instance::new(values));
    }
    Dataset::new(schema, rows, None)
}

fn write_records<I, R>(records: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = ::csv::WriterBuilder::new()
        .flexible(true)
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        w.write_record(r).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// Emits the dataset as CSV with a header row. Numbers use the shortest
/// representation that parses back to the same value.
pub fn serialize_csv(d: &Dataset) -> String {
    let header: Vec<String> = d.schema().iter().map(|a| a.name.clone()).collect();
    let body = d.rows().iter().map(|row| {
        row.values
            .iter()
            .enumerate()
            .map(|(a, &v)| d.render_value(a, v))
            .collect::<Vec<_>>()
    });
    write_records(std::iter::once(header).chain(body))
}

pub fn serialize_schema(schema: &[AttributeSpec]) -> String {
    write_records(schema.iter().map(|a| {
        let mut rec = vec![a.name.clone()];
        match &a.kind {
            AttributeKind::Numeric { units } => {
                rec.push("numeric".into());
                rec.push(units.clone());
            }
            AttributeKind::Nominal { domain } => {
                rec.push("nominal".into());
                rec.extend(domain.iter().cloned());
            }
        }
        rec
    }))
}

pub fn parse_schema(text: &str) -> Result<Vec<AttributeSpec>> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut schema = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let name = record.get(0).unwrap_or_default().to_string();
        match record.get(1) {
            Some("numeric") => {
                schema.push(AttributeSpec::numeric(name, record.get(2).unwrap_or_default()))
            }
            Some("nominal") => schema.push(AttributeSpec::nominal(
                name,
                record.iter().skip(2).map(str::to_string).collect(),
            )),
            other => {
                return Err(Error::InvalidSchema(format!(
                    "column `{name}`: unknown kind {other:?}"
                )))
            }
        }
    }
    Ok(schema)
}
