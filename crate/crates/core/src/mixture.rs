//! Per-cluster attribute densities shared by the density wrapper and EM:
//! independent normals for numeric attributes, discrete distributions for
//! nominal ones.

use crate::data::{Dataset, Instance, Ranges, Value};
use crate::format::sig9;
use crate::stats::{log_sum_exp, normal_log_pdf};

/// Smallest standard deviation allowed for `attr`: a millionth of its range,
/// or 1e-6 for a constant attribute.
pub fn std_floor(ranges: &Ranges, attr: usize) -> f64 {
    let w = ranges.width(attr);
    if w > 0.0 {
        1e-6 * w
    } else {
        1e-6
    }
}

/// How nominal distributions are estimated from (weighted) symbol counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NominalEstimator {
    /// Add a pseudo-count to every symbol.
    Laplace(f64),
    /// Maximum likelihood subject to every probability being at least the
    /// given floor.
    FlooredMl(f64),
}

/// Maximizes `Σ c_i log p_i` over the simplex with `p_i ≥ floor`:
/// `p_i = max(floor, c_i / λ)` with λ found by repeatedly pinning the
/// symbols that fall below the floor.
pub fn floored_distribution(counts: &[f64], floor: f64) -> Vec<f64> {
    let m = counts.len();
    let total: f64 = counts.iter().sum();
    if m == 0 || total <= 0.0 || floor * m as f64 >= 1.0 {
        return vec![1.0 / m.max(1) as f64; m];
    }
    let mut pinned = vec![false; m];
    loop {
        let n_pinned = pinned.iter().filter(|&&p| p).count();
        let free_mass = 1.0 - n_pinned as f64 * floor;
        let free_count: f64 = counts.iter().zip(&pinned).filter(|(_, &p)| !p).map(|(c, _)| c).sum();
        let mut changed = false;
        for i in 0..m {
            if !pinned[i] && counts[i] * free_mass / free_count < floor {
                pinned[i] = true;
                changed = true;
            }
        }
        if !changed {
            return counts
                .iter()
                .zip(&pinned)
                .map(|(c, &p)| if p { floor } else { c * free_mass / free_count })
                .collect();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeDensity {
    Normal { mean: f64, std: f64 },
    Discrete(Vec<f64>),
}

impl AttributeDensity {
    pub fn log_density(&self, v: Value) -> f64 {
        match (self, v) {
            (AttributeDensity::Normal { mean, std }, Value::Numeric(x)) => normal_log_pdf(x, *mean, *std),
            (AttributeDensity::Discrete(p), Value::Nominal(s)) => p[s].ln(),
            _ => f64::NEG_INFINITY,
        }
    }
}

/// One mixture component: prior plus a density per active attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub prior: f64,
    /// (attribute position, density)
    pub densities: Vec<(usize, AttributeDensity)>,
}

impl Component {
    /// `log(prior) + Σ log density`.
    pub fn log_joint(&self, x: &Instance) -> f64 {
        self.prior.ln()
            + self
                .densities
                .iter()
                .map(|(a, dens)| dens.log_density(x.values[*a]))
                .sum::<f64>()
    }

    /// Estimates a component from instance weights (hard or soft).
    pub fn estimate(
        d: &Dataset,
        active: &[usize],
        weights: &[f64],
        prior: f64,
        ranges: &Ranges,
        nominal: NominalEstimator,
    ) -> Component {
        let total: f64 = weights.iter().sum();
        let densities = active
            .iter()
            .map(|&a| {
                let dens = match d.schema()[a].domain() {
                    None => {
                        let floor = std_floor(ranges, a);
                        if total <= 0.0 {
                            AttributeDensity::Normal { mean: 0.0, std: floor }
                        } else {
                            let mut sum = 0.0;
                            for (row, &w) in d.rows().iter().zip(weights) {
                                sum += w * row.numeric(a);
                            }
                            let mean = sum / total;
                            let mut sq = 0.0;
                            for (row, &w) in d.rows().iter().zip(weights) {
                                let dx = row.numeric(a) - mean;
                                sq += w * dx * dx;
                            }
                            let std = (sq / total).sqrt().max(floor);
                            AttributeDensity::Normal { mean, std }
                        }
                    }
                    Some(domain) => {
                        let mut counts = vec![0.0; domain.len()];
                        for (row, &w) in d.rows().iter().zip(weights) {
                            counts[row.nominal(a)] += w;
                        }
                        let probs = match nominal {
                            NominalEstimator::Laplace(alpha) => {
                                counts.iter_mut().for_each(|c| *c += alpha);
                                let z: f64 = counts.iter().sum();
                                if z > 0.0 {
                                    counts.iter().map(|c| c / z).collect()
                                } else {
                                    vec![1.0 / domain.len() as f64; domain.len()]
                                }
                            }
                            NominalEstimator::FlooredMl(floor) => floored_distribution(&counts, floor),
                        };
                        AttributeDensity::Discrete(probs)
                    }
                };
                (a, dens)
            })
            .collect();
        Component { prior, densities }
    }
}

/// Log of the mixture density at `x` and the normalized posterior.
pub fn posterior(components: &[Component], x: &Instance) -> (f64, Vec<f64>) {
    let joints: Vec<f64> = components.iter().map(|c| c.log_joint(x)).collect();
    let lse = log_sum_exp(&joints);
    let post = joints.iter().map(|j| (j - lse).exp()).collect();
    (lse, post)
}

/// Text layout per component: prior, then per attribute mean/std or the
/// discrete distribution.
pub fn render_components(d: &Dataset, components: &[Component], counts: Option<&[usize]>) -> String {
    let n: usize = counts.map_or(0, |c| c.iter().sum());
    let mut out = String::new();
    for (k, comp) in components.iter().enumerate() {
        out.push_str(&format!("[cluster {k}]\nprior={}\n", sig9(comp.prior)));
        if let Some(c) = counts {
            let pct = if n == 0 { 0.0 } else { 100.0 * c[k] as f64 / n as f64 };
            out.push_str(&format!("clustered_instances={}\npercent={}\n", c[k], sig9(pct)));
        }
        for (a, dens) in &comp.densities {
            let name = &d.schema()[*a].name;
            match dens {
                AttributeDensity::Normal { mean, std } => {
                    out.push_str(&format!("{name}.mean={}\n{name}.std={}\n", sig9(*mean), sig9(*std)));
                }
                AttributeDensity::Discrete(p) => {
                    let domain = d.schema()[*a].domain().unwrap_or_default();
                    let body: Vec<String> = domain
                        .iter()
                        .zip(p)
                        .map(|(s, p)| format!("{s}:{}", sig9(*p)))
                        .collect();
                    out.push_str(&format!("{name}.distribution={}\n", body.join(" ")));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_pins_small_symbols() {
        let p = floored_distribution(&[0.0, 1.0, 3.0], 0.1);
        assert!((p[0] - 0.1).abs() < 1e-15);
        assert!((p[1] - 0.225).abs() < 1e-12 && (p[2] - 0.675).abs() < 1e-12);
        assert_eq!(floored_distribution(&[2.0, 2.0], 1e-6), vec![0.5, 0.5]);
        assert_eq!(floored_distribution(&[0.0, 0.0], 1e-6), vec![0.5, 0.5]);
    }

    #[test]
    fn floored_solution_beats_perturbations() {
        let c = [0.01, 0.3, 5.0, 0.0, 2.2];
        let p = floored_distribution(&c, 0.05);
        let obj = |q: &[f64]| c.iter().zip(q).map(|(c, q)| c * q.ln()).sum::<f64>();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..5 {
            for j in 0..5 {
                let mut q = p.clone();
                q[i] += 1e-4;
                q[j] -= 1e-4;
                if i != j && q[j] >= 0.05 {
                    assert!(obj(&q) <= obj(&p) + 1e-12);
                }
            }
        }
    }
}
