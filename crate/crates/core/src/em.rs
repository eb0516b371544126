//! EM clustering over mixed attributes.
//!
//! Components are products of independent per-attribute densities (normal
//! for numeric, smoothed discrete for nominal). Fitting starts from a seeded
//! k-means partition and alternates expectation and maximization until the
//! average log-likelihood stops improving by more than `ll_tol`.

use crate::assignment::{ClusterAssignment, Label};
use crate::baseline::fold_indices;
use crate::data::{compute_ranges, Dataset, Ranges};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::mixture::{posterior, render_components, Component, NominalEstimator};
use crate::partition::{kmeans, DEFAULT_MAX_ITER};
use crate::rng::Stream;

pub const DEFAULT_LL_TOL: f64 = 1e-6;
/// Lower bound on every nominal probability. The M-step is maximum
/// likelihood under this constraint, which keeps each iteration monotone.
pub const PROBABILITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    pub k: usize,
    pub components: Vec<Component>,
    pub active: Vec<usize>,
    pub ranges: Ranges,
    /// Training-set average log-likelihood of the final parameters.
    pub avg_log_likelihood: f64,
    pub iterations_run: usize,
    /// Average log-likelihood before the first and after every M-step.
    pub ll_history: Vec<f64>,
    /// Cross-validated held-out log-likelihood per k tried, when selected
    /// by [`em_select_k`].
    pub cv_trace: Vec<f64>,
}

impl MixtureModel {
    pub fn priors(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.prior).collect()
    }

    /// Responsibilities of every component for `x`.
    pub fn responsibilities(&self, x: &crate::data::Instance) -> Vec<f64> {
        posterior(&self.components, x).1
    }

    /// Hard assignment: argmax responsibility, ties to the lowest component.
    pub fn assign(&self, d: &Dataset) -> Result<ClusterAssignment> {
        let labels = d
            .rows()
            .iter()
            .map(|x| Label::Cluster(argmax(&self.responsibilities(x))))
            .collect();
        ClusterAssignment::with_k(labels, self.k)
    }

    pub fn to_text(&self, d: &Dataset, assignment: &ClusterAssignment) -> String {
        let mut out = format!(
            "# steelclust mixture model\nversion=1\nalgorithm=em\nk={}\niterations_run={}\navg_log_likelihood={}\n",
            self.k,
            self.iterations_run,
            sig9(self.avg_log_likelihood)
        );
        if !self.cv_trace.is_empty() {
            let t: Vec<String> = self.cv_trace.iter().map(|v| sig9(*v)).collect();
            out.push_str(&format!("cv_log_likelihood_by_k={}\n", t.join(",")));
        }
        let mut resp_sums = vec![0.0; self.k];
        for x in d.rows() {
            for (s, r) in resp_sums.iter_mut().zip(self.responsibilities(x)) {
                *s += r;
            }
        }
        let sums: Vec<String> = resp_sums.iter().map(|v| sig9(*v)).collect();
        out.push_str(&format!("responsibility_sums={}\n", sums.join(",")));
        out.push_str(&render_components(d, &self.components, Some(&assignment.counts())));
        out
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

struct EStep {
    avg_ll: f64,
    // row-major n x k
    resp: Vec<f64>,
}

fn e_step(components: &[Component], d: &Dataset) -> EStep {
    let k = components.len();
    let mut resp = Vec::with_capacity(d.len() * k);
    let mut total = 0.0;
    for x in d.rows() {
        let (ll, post) = posterior(components, x);
        total += ll;
        resp.extend(post);
    }
    EStep {
        avg_ll: total / d.len() as f64,
        resp,
    }
}

fn m_step(d: &Dataset, active: &[usize], ranges: &Ranges, resp: &[f64], k: usize) -> Vec<Component> {
    let n = d.len();
    (0..k)
        .map(|c| {
            let weights: Vec<f64> = (0..n).map(|i| resp[i * k + c]).collect();
            let prior = weights.iter().sum::<f64>() / n as f64;
            let floors = NominalEstimator::FlooredMl(PROBABILITY_FLOOR);
            Component::estimate(d, active, &weights, prior, ranges, floors)
        })
        .collect()
}

pub fn em_fit(
    d: &Dataset,
    k: usize,
    seed: u64,
    max_iter: usize,
    ll_tol: f64,
) -> Result<(MixtureModel, ClusterAssignment)> {
    if k < 1 || k > d.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={} (number of instances)",
            d.len()
        )));
    }
    if max_iter < 1 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    if !(ll_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("ll_tol must be positive, got {ll_tol}")));
    }
    let ranges = compute_ranges(d);
    let active = d.active_attributes();
    let (_, init) = kmeans(d, k, seed, DEFAULT_MAX_ITER)?;
    let hard: Vec<f64> = init
        .labels()
        .iter()
        .flat_map(|l| (0..k).map(move |c| if *l == Label::Cluster(c) { 1.0 } else { 0.0 }))
        .collect();
    let mut components = m_step(d, &active, &ranges, &hard, k);
    let mut step = e_step(&components, d);
    let mut history = vec![step.avg_ll];
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        components = m_step(d, &active, &ranges, &step.resp, k);
        let next = e_step(&components, d);
        let gain = next.avg_ll - step.avg_ll;
        history.push(next.avg_ll);
        step = next;
        if gain < ll_tol {
            break;
        }
    }
    let model = MixtureModel {
        k,
        components,
        active,
        ranges,
        avg_log_likelihood: step.avg_ll,
        iterations_run: iterations,
        ll_history: history,
        cv_trace: Vec::new(),
    };
    let assignment = model.assign(d)?;
    Ok((model, assignment))
}

/// `(1/n) Σ log Σ_k prior_k density_k(x)`.
pub fn avg_log_likelihood(m: &MixtureModel, d: &Dataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(d.rows().iter().map(|x| posterior(&m.components, x).0).sum::<f64>() / d.len() as f64)
}

/// Increases k from 1 while the cross-validated held-out log-likelihood
/// strictly improves, then refits the chosen k on all of `d`.
pub fn em_select_k(
    d: &Dataset,
    seed: u64,
    folds: usize,
    k_max: usize,
    max_iter: usize,
    ll_tol: f64,
) -> Result<(MixtureModel, ClusterAssignment)> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let fold_rows = fold_indices(d.len(), folds, seed, Stream::EmFolds)?;
    let mut trace: Vec<f64> = Vec::new();
    let mut chosen = 1;
    for k in 1..=k_max {
        let mut total = 0.0;
        let mut feasible = true;
        for held in &fold_rows {
            let mut is_held = vec![false; d.len()];
            for &r in held {
                is_held[r] = true;
            }
            let train_rows: Vec<usize> = (0..d.len()).filter(|&r| !is_held[r]).collect();
            if k > train_rows.len() {
                feasible = false;
                break;
            }
            let train = d.subset(&train_rows);
            let (model, _) = em_fit(&train, k, seed, max_iter, ll_tol)?;
            let test = d.subset(held);
            total += avg_log_likelihood(&model, &test)? * held.len() as f64;
        }
        if !feasible {
            break;
        }
        let cv = total / d.len() as f64;
        let improved = trace.last().is_none_or(|&prev| cv > prev);
        trace.push(cv);
        if !improved {
            break;
        }
        chosen = k;
    }
    let (mut model, assignment) = em_fit(d, chosen, seed, max_iter, ll_tol)?;
    model.cv_trace = trace;
    Ok((model, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSpec, Instance, Value};
    use crate::mixture::AttributeDensity;
    use crate::stats::{mean, std_dev};

    fn one_d(xs: &[f64]) -> Dataset {
        Dataset::new(
            vec![AttributeSpec::numeric("x", "")],
            xs.iter().map(|&x| Instance::new(vec![Value::Numeric(x)])).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn single_component_closed_form() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let d = one_d(&xs);
        let (m, a) = em_fit(&d, 1, 0, 50, DEFAULT_LL_TOL).unwrap();
        let (mu, sd) = (mean(&xs), std_dev(&xs));
        match &m.components[0].densities[0].1 {
            AttributeDensity::Normal { mean, std } => {
                assert!((mean - mu).abs() < 1e-12);
                assert!((std - sd).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let expected: f64 = xs
            .iter()
            .map(|x| -0.5 * ((x - mu) / sd).powi(2) - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln())
            .sum::<f64>()
            / 4.0;
        assert!((m.avg_log_likelihood - expected).abs() < 1e-12);
        assert_eq!(a.counts(), vec![4]);
    }

    #[test]
    fn standard_normal_at_origin() {
        let m = MixtureModel {
            k: 1,
            components: vec![Component {
                prior: 1.0,
                densities: vec![(0, AttributeDensity::Normal { mean: 0.0, std: 1.0 })],
            }],
            active: vec![0],
            ranges: Ranges::from_bounds(vec![Some((0.0, 0.0))]),
            avg_log_likelihood: 0.0,
            iterations_run: 0,
            ll_history: vec![],
            cv_trace: vec![],
        };
        let ll = avg_log_likelihood(&m, &one_d(&[0.0])).unwrap();
        assert!((ll - (-0.918_938_533_204_672_7)).abs() < 1e-12);
        assert!(avg_log_likelihood(&m, &one_d(&[])).is_err());
    }

    #[test]
    fn separated_blobs() {
        let d = one_d(&[-0.1, 0.0, 0.1, 9.9, 10.0, 10.1]);
        let (m, a) = em_fit(&d, 2, 1, 100, DEFAULT_LL_TOL).unwrap();
        let mut means: Vec<f64> = m
            .components
            .iter()
            .map(|c| match c.densities[0].1 {
                AttributeDensity::Normal { mean, .. } => mean,
                _ => unreachable!(),
            })
            .collect();
        means.sort_by(f64::total_cmp);
        assert!((means[0] - 0.0).abs() < 0.05 && (means[1] - 10.0).abs() < 0.05);
        assert_eq!(a.counts(), vec![3, 3]);
    }

    #[test]
    fn parameter_errors() {
        let d = one_d(&[1.0, 2.0]);
        assert!(em_fit(&d, 3, 0, 10, 1e-6).is_err());
        assert!(em_fit(&d, 1, 0, 0, 1e-6).is_err());
        assert!(em_fit(&d, 1, 0, 10, 0.0).is_err());
        assert!(em_select_k(&d, 0, 3, 2, 10, 1e-6).is_err());
    }

    #[test]
    fn k_max_one_is_forced() {
        let d = one_d(&[0.0, 0.1, 5.0, 5.1, 9.0, 9.2]);
        let (m, _) = em_select_k(&d, 3, 2, 1, 50, 1e-6).unwrap();
        assert_eq!(m.k, 1);
        assert_eq!(m.cv_trace.len(), 1);
    }
}
