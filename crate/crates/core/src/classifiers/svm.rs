//! Linear soft-margin SVM.
//!
//! Binary problems are solved in the dual with sequential minimal
//! optimisation and second-order working-set selection. The bias is
//! unregularised. Multi-class prediction is one-vs-rest.
//!
//! The primal objective is `0.5 |w|^2 + c * sum(max(0, 1 - y (w.x + b)))`.
//! The dual objective `sum(alpha) - 0.5 |w|^2` never exceeds it, so the
//! gap between the two bounds the distance to the optimum.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LabeledSet;
use crate::error::{Error, Result};
use crate::matrix::{gemm, Matrix};

const KKT_TOLERANCE: f64 = 1e-6;
const TAU: f64 = 1e-12;
/// Relative duality gap accepted at the end of a solve.
pub const GAP_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub w: Vec<f64>,
    pub b: f64,
    /// Dual variables, one per training row.
    #[serde(skip)]
    pub alpha: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b
    }

    /// `(primal - dual) / max(|primal|, 1)`.
    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective) / self.primal_objective.abs().max(1.0)
    }

    /// `+1` or `-1`; a zero decision value goes to `-1`, the lower class.
    pub fn predict(&self, x: &[f64]) -> i8 {
        if self.decision(x) > 0.0 {
            1
        } else {
            -1
        }
    }
}

fn gram(x: &Matrix) -> Vec<f64> {
    let n = x.rows();
    let mut k = vec![0.0; n * n];
    gemm(n, x.cols(), n, 1.0, x.as_slice(), false, x.as_slice(), true, 0.0, &mut k);
    k
}

/// Primal objective for a fixed `(w, b)`.
pub fn primal_objective(x: &Matrix, y: &[f64], c: f64, w: &[f64], b: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(r, &yi)| {
            let f = r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            (1.0 - yi * f).max(0.0)
        })
        .sum();
    reg + c * loss
}

/// Fits one binary problem. `y` must be `+1`/`-1` with both present.
pub fn svm_fit_binary(x: &Matrix, y: &[f64], c: f64) -> Result<BinarySvm> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: y.len() });
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) || y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::validation("binary SVM needs labels +1 and -1, both present"));
    }
    let k = gram(x);
    fit_with_gram(x, y, c, &k)
}

fn fit_with_gram(x: &Matrix, y: &[f64], c: f64, k: &[f64]) -> Result<BinarySvm> {
    let n = y.len();
    let kk = |i: usize, j: usize| k[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(10_000_000);
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    loop {
        // maximal violating pair, second-order choice of j
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = t;
                }
            } else if !lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        if i_sel != usize::MAX {
            let i = i_sel;
            for t in 0..n {
                let (grad_diff, quad) = if y[t] > 0.0 {
                    if lower(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(grad[t]);
                    (gmax + grad[t], kk(i, i) + kk(t, t) - 2.0 * y[i] * kk(i, t))
                } else {
                    if upper(alpha[t]) {
                        continue;
                    }
                    gmax2 = gmax2.max(-grad[t]);
                    (gmax - grad[t], kk(i, i) + kk(t, t) + 2.0 * y[i] * kk(i, t))
                };
                if grad_diff > 0.0 {
                    let q = if quad > 0.0 { quad } else { TAU };
                    let obj = -(grad_diff * grad_diff) / q;
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || gmax + gmax2 < KKT_TOLERANCE {
            break;
        }
        if iterations >= max_iter {
            let svm = finish(x, y, c, &alpha, &grad, iterations);
            return Err(Error::NonConvergence { iterations, gap: svm.relative_gap() });
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * kk(i, j);
        if y[i] != y[j] {
            let quad = (kk(i, i) + kk(j, j) + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (kk(i, i) + kk(j, j) - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kk(i, t) * di + y[j] * kk(j, t) * dj);
        }
    }
    let svm = finish(x, y, c, &alpha, &grad, iterations);
    if svm.relative_gap() > GAP_TOLERANCE {
        return Err(Error::NonConvergence { iterations, gap: svm.relative_gap() });
    }
    Ok(svm)
}

fn finish(x: &Matrix, y: &[f64], c: f64, alpha: &[f64], grad: &[f64], iterations: usize) -> BinarySvm {
    let d = x.cols();
    let mut w = vec![0.0; d];
    for (i, r) in x.iter_rows().enumerate() {
        let coef = alpha[i] * y[i];
        if coef != 0.0 {
            for (wj, xj) in w.iter_mut().zip(r) {
                *wj += coef * xj;
            }
        }
    }
    // bias from the free vectors, or the middle of the feasible range
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 {
        sum_free / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };
    let b = -rho;
    let w_sq: f64 = w.iter().map(|v| v * v).sum();
    let dual = alpha.iter().sum::<f64>() - 0.5 * w_sq;
    let primal = primal_objective(x, y, c, &w, b);
    BinarySvm { w, b, alpha: alpha.to_vec(), primal_objective: primal, dual_objective: dual, iterations }
}

/// One binary SVM per class present in training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneVsRestSvm {
    dim: usize,
    /// Indexed by class; `None` for classes absent from training.
    machines: Vec<Option<BinarySvm>>,
}

impl OneVsRestSvm {
    pub fn fit(data: &LabeledSet, c: f64) -> Result<Self> {
        let k = gram(data.x());
        let counts = data.class_counts();
        let mut machines = Vec::with_capacity(data.n_classes());
        for (class, &count) in counts.iter().enumerate() {
            if count == 0 {
                machines.push(None);
                continue;
            }
            let y: Vec<f64> = data.y().iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            machines.push(Some(fit_with_gram(data.x(), &y, c, &k)?));
        }
        Ok(Self { dim: data.dim(), machines })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.machines.len()
    }

    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.machines.iter().map(|m| m.as_ref().map_or(f64::NEG_INFINITY, |m| m.decision(x))).collect()
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        super::argmax(&self.decision_values(x))
    }
}
