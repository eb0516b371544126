//! Two-attribute scatter plots as standalone SVG.
//!
//! Markers are `<circle>` elements emitted in row order; legend swatches are
//! the only `<rect>` elements. Nominal axes place each symbol at its domain
//! index.

use std::fmt::Write as _;

use crate::assignment::{ClusterAssignment, Label};
use crate::data::{Dataset, Value};
use crate::error::{Error, Result};
use crate::format::sig;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#393b79",
];
pub const NOISE_COLOR: &str = "#7f7f7f";
pub const UNDEFINED_COLOR: &str = "#000000";

pub fn label_color(label: Label) -> &'static str {
    match label {
        Label::Cluster(c) => PALETTE[c % PALETTE.len()],
        Label::Noise => NOISE_COLOR,
        Label::Undefined => UNDEFINED_COLOR,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn coordinate(v: Value) -> f64 {
    match v {
        Value::Numeric(x) => x,
        Value::Nominal(i) => i as f64,
    }
}

fn axis_label(d: &Dataset, attr: usize) -> String {
    let spec = &d.schema()[attr];
    match spec.units() {
        Some(u) if !u.is_empty() => format!("{} ({u})", spec.name),
        _ => spec.name.clone(),
    }
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn of(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        if lo == hi {
            return Axis { lo: lo - 0.5, hi: hi + 0.5 };
        }
        Axis { lo, hi }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

/// Scatter of `x_attr` against `y_attr`, colored by cluster label.
pub fn emit_scatter_svg(d: &Dataset, x_attr: usize, y_attr: usize, assignment: &ClusterAssignment) -> Result<String> {
    for a in [x_attr, y_attr] {
        if a >= d.n_attributes() {
            return Err(Error::MissingColumn(format!("attribute index {a}")));
        }
    }
    if assignment.len() != d.len() {
        return Err(Error::LengthMismatch {
            left: assignment.len(),
            right: d.len(),
        });
    }
    let xs = Axis::of(d.rows().iter().map(|r| coordinate(r.values[x_attr])));
    let ys = Axis::of(d.rows().iter().map(|r| coordinate(r.values[y_attr])));
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |v: f64| LEFT + xs.frac(v) * pw;
    let py = |v: f64| TOP + ph - ys.frac(v) * ph;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT} {TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw
    );
    for (axis, horizontal) in [(&xs, true), (&ys, false)] {
        for t in 0..=4 {
            let v = axis.lo + (axis.hi - axis.lo) * t as f64 / 4.0;
            let text = sig(v, 4);
            if horizontal {
                let x = px(v);
                let _ = writeln!(
                    out,
                    r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{text}</text>"#,
                    TOP + ph + 16.0
                );
            } else {
                let y = py(v);
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{text}</text>"#,
                    LEFT - 6.0,
                    y + 4.0
                );
            }
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(&axis_label(d, x_attr))
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&axis_label(d, y_attr))
    );

    for (row, &label) in d.rows().iter().zip(assignment.labels()) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}" fill-opacity="0.8"/>"#,
            px(coordinate(row.values[x_attr])),
            py(coordinate(row.values[y_attr])),
            label_color(label)
        );
    }

    let mut legend: Vec<Label> = (0..assignment.n_clusters())
        .map(Label::Cluster)
        .filter(|&l| assignment.count_of(l) > 0)
        .collect();
    for pseudo in [Label::Noise, Label::Undefined] {
        if assignment.count_of(pseudo) > 0 {
            legend.push(pseudo);
        }
    }
    let lx = WIDTH - RIGHT + 20.0;
    for (i, &label) in legend.iter().enumerate() {
        let y = TOP + 20.0 * i as f64;
        let name = match label {
            Label::Cluster(c) => format!("cluster{c}"),
            other => other.to_string(),
        };
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{y}" width="12" height="12" fill="{}"/>"#,
            label_color(label)
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{name}</text>"#, lx + 18.0, y + 10.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSpec, Instance};

    fn data(n: usize) -> Dataset {
        Dataset::new(
            vec![
                AttributeSpec::nominal("Product_CD", vec!["p<1>".into(), "p2".into()]),
                AttributeSpec::numeric("Sales_value", "INR"),
            ],
            (0..n)
                .map(|i| Instance::new(vec![Value::Nominal(i % 2), Value::Numeric(i as f64 * 10.0)]))
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn two_markers_two_entries() {
        let d = data(2);
        let svg = emit_scatter_svg(&d, 0, 1, &ClusterAssignment::from_indices(&[0, 1]).unwrap()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<rect").count(), 2);
        assert!(svg.contains("Sales_value (INR)"));
        assert!(svg.contains(">Product_CD<"));
    }

    #[test]
    fn noise_has_its_own_color() {
        let d = data(3);
        let a = ClusterAssignment::new(vec![Label::Cluster(0), Label::Noise, Label::Noise]).unwrap();
        let svg = emit_scatter_svg(&d, 0, 1, &a).unwrap();
        assert_eq!(svg.matches(NOISE_COLOR).count(), 3);
        assert!(svg.contains(">NOISE<"));
    }

    #[test]
    fn empty_dataset_gives_axes_only() {
        let d = data(0);
        let svg = emit_scatter_svg(&d, 0, 1, &ClusterAssignment::new(vec![]).unwrap()).unwrap();
        assert!(!svg.contains("<circle") && !svg.contains("<rect"));
        assert!(svg.contains("<path"));
    }

    #[test]
    fn deterministic_and_validated() {
        let d = data(5);
        let a = ClusterAssignment::from_indices(&[0, 0, 1, 1, 0]).unwrap();
        assert_eq!(emit_scatter_svg(&d, 1, 0, &a).unwrap(), emit_scatter_svg(&d, 1, 0, &a).unwrap());
        assert!(emit_scatter_svg(&d, 2, 0, &a).is_err());
        assert!(emit_scatter_svg(&d, 0, 1, &ClusterAssignment::from_indices(&[0]).unwrap()).is_err());
    }
}
