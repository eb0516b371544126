//! ZeroR baseline, regression metrics and pooled k-fold cross-validation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::format::{fixed4, sig9};
use crate::rng::{stream, Stream};
use crate::stats::mean;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroRPrediction {
    Numeric(f64),
    /// Domain index of the modal symbol.
    Nominal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroRModel {
    pub target: usize,
    pub prediction: ZeroRPrediction,
}

impl ZeroRModel {
    pub fn numeric_prediction(&self) -> Option<f64> {
        match self.prediction {
            ZeroRPrediction::Numeric(x) => Some(x),
            ZeroRPrediction::Nominal(_) => None,
        }
    }
}

/// Mean of a numeric target, mode (ties to domain order) of a nominal one.
pub fn zero_r_fit(d: &Dataset, target: usize) -> Result<ZeroRModel> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let spec = d
        .schema()
        .get(target)
        .ok_or_else(|| Error::InvalidParameter(format!("target {target} out of range")))?;
    let prediction = match spec.domain() {
        None => ZeroRPrediction::Numeric(mean(&d.numeric_column(target))),
        Some(domain) => {
            let mut counts = vec![0usize; domain.len()];
            for s in d.nominal_column(target) {
                counts[s] += 1;
            }
            ZeroRPrediction::Nominal(argmax_first(&counts))
        }
    };
    Ok(ZeroRModel { target, prediction })
}

pub(crate) fn argmax_first(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Regression quality of a predictor against a mean-predicting baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub correlation_coefficient: f64,
    pub mean_absolute_error: f64,
    pub root_mean_squared_error: f64,
    pub relative_absolute_error_pct: f64,
    pub root_relative_squared_error_pct: f64,
    pub n_instances: usize,
    /// The baseline made no error (constant actuals); relative errors are
    /// then reported as 100%.
    #[serde(skip)]
    pub degenerate_baseline: bool,
}

impl MetricsReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "correlation_coefficient={}\nmean_absolute_error={}\nroot_mean_squared_error={}\n\
             relative_absolute_error_pct={}\nroot_relative_squared_error_pct={}\nn_instances={}\n",
            sig9(self.correlation_coefficient),
            sig9(self.mean_absolute_error),
            sig9(self.root_mean_squared_error),
            sig9(self.relative_absolute_error_pct),
            sig9(self.root_relative_squared_error_pct),
            self.n_instances
        );
        if self.degenerate_baseline {
            out.push_str("# degenerate baseline: actual values are constant\n");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn regression_metrics(predicted: &[f64], actual: &[f64]) -> Result<MetricsReport> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = actual.len() as f64;
    let actual_mean = mean(actual);
    let mut abs_err = 0.0;
    let mut sq_err = 0.0;
    let mut base_abs = 0.0;
    let mut base_sq = 0.0;
    for (&p, &a) in predicted.iter().zip(actual) {
        abs_err += (p - a).abs();
        sq_err += (p - a) * (p - a);
        base_abs += (actual_mean - a).abs();
        base_sq += (actual_mean - a) * (actual_mean - a);
    }
    let mae = abs_err / n;
    let rmse = (sq_err / n).sqrt();
    let base_mae = base_abs / n;
    let degenerate = base_mae == 0.0;
    let (rae, rrse) = if degenerate {
        (100.0, 100.0)
    } else {
        (100.0 * (abs_err / base_abs), 100.0 * (sq_err / base_sq).sqrt())
    };
    Ok(MetricsReport {
        correlation_coefficient: pearson(predicted, actual),
        mean_absolute_error: mae,
        root_mean_squared_error: rmse,
        relative_absolute_error_pct: rae,
        root_relative_squared_error_pct: rrse,
        n_instances: actual.len(),
        degenerate_baseline: degenerate,
    })
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Seeded fold membership: row positions per fold, each sorted, sizes
/// differing by at most one.
pub fn fold_indices(n: usize, folds: usize, seed: u64, which: Stream) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::InvalidParameter(format!(
            "{n} instances cannot fill {folds} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, which));
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        out.push(fold);
        start += len;
    }
    Ok(out)
}

/// Held-out ZeroR predictions in canonical order (fold, then row index),
/// returned as (row, predicted, actual).
pub fn cross_validate_predictions(
    d: &Dataset,
    target: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<(usize, f64, f64)>> {
    if !d.schema().get(target).is_some_and(|a| a.is_numeric()) {
        let name = d.schema().get(target).map_or_else(|| target.to_string(), |a| a.name.clone());
        return Err(Error::NotNumeric(name));
    }
    let fold_rows = fold_indices(d.len(), folds, seed, Stream::CrossValidation)?;
    let column = d.numeric_column(target);
    let mut out = Vec::with_capacity(d.len());
    let mut in_fold = vec![false; d.len()];
    for fold in &fold_rows {
        for &r in fold {
            in_fold[r] = true;
        }
        let train: Vec<f64> = (0..d.len()).filter(|&r| !in_fold[r]).map(|r| column[r]).collect();
        let prediction = mean(&train);
        out.extend(fold.iter().map(|&r| (r, prediction, column[r])));
        for &r in fold {
            in_fold[r] = false;
        }
    }
    Ok(out)
}

/// Pooled k-fold cross-validation of ZeroR on a numeric target.
pub fn cross_validate_zero_r(d: &Dataset, target: usize, folds: usize, seed: u64) -> Result<MetricsReport> {
    let preds = cross_validate_predictions(d, target, folds, seed)?;
    let p: Vec<f64> = preds.iter().map(|t| t.1).collect();
    let a: Vec<f64> = preds.iter().map(|t| t.2).collect();
    regression_metrics(&p, &a)
}

/// Human table in the orientation of the baseline report: metrics as rows,
/// one column per evaluated attribute.
pub fn render_table(columns: &[(String, f64, MetricsReport)]) -> String {
    let mut out = String::from("Metric");
    for (name, _, _) in columns {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    type Getter = fn(f64, &MetricsReport) -> String;
    let rows: [(&str, Getter); 7] = [
        ("ZeroR predicted value", |p, _| fixed4(p)),
        ("Correlation coefficient", |_, r| fixed4(r.correlation_coefficient)),
        ("Mean absolute error", |_, r| fixed4(r.mean_absolute_error)),
        ("Root mean squared error", |_, r| fixed4(r.root_mean_squared_error)),
        ("Relative absolute error", |_, r| format!("{}%", fixed4(r.relative_absolute_error_pct))),
        ("Root relative squared error", |_, r| {
            format!("{}%", fixed4(r.root_relative_squared_error_pct))
        }),
        ("Total number of instances", |_, r| r.n_instances.to_string()),
    ];
    for (label, get) in rows {
        out.push_str(label);
        for (_, pred, report) in columns {
            out.push('\t');
            out.push_str(&get(*pred, report));
        }
        out.push('\n');
    }
    out
}
