use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LabeledSet;

/// Gaussian naive Bayes with class-frequency priors. Every per-class
/// variance gets `var_smoothing * max_j var(x_j)` added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Indexed by class; empty for classes absent from training.
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
    log_priors: Vec<f64>,
    dim: usize,
}

fn mean_var<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let rows: Vec<&[f64]> = rows.collect();
    let n = rows.len();
    let mut mean = vec![0.0; dim];
    for r in &rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; dim];
    for r in &rows {
        for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n as f64);
    (mean, var, n)
}

impl GaussianNb {
    pub fn fit(data: &LabeledSet, var_smoothing: f64) -> Self {
        let dim = data.dim();
        let (_, overall_var, _) = mean_var(data.x().iter_rows(), dim);
        let floor = var_smoothing * overall_var.iter().copied().fold(0.0, f64::max);
        let n = data.len() as f64;
        let mut means = Vec::new();
        let mut vars = Vec::new();
        let mut log_priors = Vec::new();
        for class in 0..data.n_classes() {
            let rows = data.x().iter_rows().zip(data.y()).filter(|(_, &y)| y == class).map(|(r, _)| r);
            let (m, mut v, count) = mean_var(rows, dim);
            if count == 0 {
                means.push(Vec::new());
                vars.push(Vec::new());
                log_priors.push(f64::NEG_INFINITY);
                continue;
            }
            v.iter_mut().for_each(|s| *s += floor);
            means.push(m);
            vars.push(v);
            log_priors.push(libm::log(count as f64 / n));
        }
        Self { means, vars, log_priors, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.log_priors.len()
    }

    /// Joint log-likelihood per class; `-inf` for absent classes.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_classes())
            .map(|c| {
                if self.means[c].is_empty() {
                    return f64::NEG_INFINITY;
                }
                let mut ll = self.log_priors[c];
                for ((v, m), s) in x.iter().zip(&self.means[c]).zip(&self.vars[c]) {
                    ll -= 0.5 * libm::log(2.0 * core::f64::consts::PI * s) + (v - m) * (v - m) / (2.0 * s);
                }
                ll
            })
            .collect()
    }

    pub fn predict_proba_row(&self, x: &[f64]) -> Vec<f64> {
        let jll = self.joint_log_likelihood(x);
        let top = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = jll.iter().map(|&l| if l == f64::NEG_INFINITY { 0.0 } else { libm::exp(l - top) }).collect();
        let z: f64 = exps.iter().sum();
        exps.iter().map(|e| e / z).collect()
    }
}
