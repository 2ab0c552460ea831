//! Fully connected network: tanh hidden layers, softmax output,
//! cross-entropy loss, trained with Adam on shuffled mini-batches.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::LabeledSet;
use crate::error::{Error, Result};
use crate::matrix::{gemm, Matrix};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnParams {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AnnParams {
    fn default() -> Self {
        Self {
            hidden: vec![500, 500],
            learning_rate: 0.001,
            epochs: 200,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AnnParams {
    pub fn validate(&self) -> bool {
        self.hidden.iter().all(|&h| h > 0)
            && self.learning_rate > 0.0
            && self.batch_size > 0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0
    }
}

/// Weights (`fan_in x fan_out`) and biases of every layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layers {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Layers {
    pub fn zeros(sizes: &[usize]) -> Self {
        let weights = sizes.windows(2).map(|w| Matrix::zeros(w[0], w[1])).collect();
        let biases = sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Self { weights, biases }
    }

    /// Glorot-uniform weights and biases.
    pub fn glorot(sizes: &[usize], rng: &mut crate::rng::Rng) -> Self {
        let mut l = Self::zeros(sizes);
        for (w, b) in l.weights.iter_mut().zip(l.biases.iter_mut()) {
            let limit = libm::sqrt(6.0 / (w.rows() + w.cols()) as f64);
            for v in w.as_mut_slice().iter_mut().chain(b.iter_mut()) {
                *v = rng.random_range(-limit..limit);
            }
        }
        l
    }

    /// Layer widths, input first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.weights[0].rows()];
        s.extend(self.weights.iter().map(Matrix::cols));
        s
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().zip(&self.biases).flat_map(|(w, b)| w.as_slice().iter().chain(b.iter()))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| w.as_mut_slice().iter_mut().chain(b.iter_mut()))
    }
}

struct Forward {
    /// Input, then every hidden activation, then the softmax output.
    acts: Vec<Vec<f64>>,
}

fn forward(layers: &Layers, x: &[f64], batch: usize) -> Forward {
    let n_layers = layers.weights.len();
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
    acts.push(x.to_vec());
    for (l, (w, b)) in layers.weights.iter().zip(&layers.biases).enumerate() {
        let (fan_in, fan_out) = (w.rows(), w.cols());
        let mut z = vec![0.0; batch * fan_out];
        for row in z.chunks_exact_mut(fan_out) {
            row.copy_from_slice(b);
        }
        gemm(batch, fan_in, fan_out, 1.0, &acts[l], false, w.as_slice(), false, 1.0, &mut z);
        if l + 1 < n_layers {
            z.iter_mut().for_each(|v| *v = libm::tanh(*v));
        } else {
            for row in z.chunks_exact_mut(fan_out) {
                softmax_in_place(row);
            }
        }
        acts.push(z);
    }
    Forward { acts }
}

fn softmax_in_place(row: &mut [f64]) {
    let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for v in row.iter_mut() {
        *v = libm::exp(*v - top);
        z += *v;
    }
    row.iter_mut().for_each(|v| *v /= z);
}

fn cross_entropy(probs: &[f64], y: &[usize], classes: usize) -> f64 {
    let n = y.len() as f64;
    y.iter()
        .enumerate()
        .map(|(i, &c)| -libm::log(probs[i * classes + c].max(f64::MIN_POSITIVE)))
        .sum::<f64>()
        / n
}

fn backward(layers: &Layers, fwd: &Forward, y: &[usize], grad: &mut Layers) {
    let batch = y.len();
    let n_layers = layers.weights.len();
    let classes = layers.weights[n_layers - 1].cols();
    let mut delta = fwd.acts[n_layers].clone();
    for (i, &c) in y.iter().enumerate() {
        delta[i * classes + c] -= 1.0;
    }
    let inv = 1.0 / batch as f64;
    delta.iter_mut().for_each(|v| *v *= inv);

    for l in (0..n_layers).rev() {
        let w = &layers.weights[l];
        let (fan_in, fan_out) = (w.rows(), w.cols());
        gemm(fan_in, batch, fan_out, 1.0, &fwd.acts[l], true, &delta, false, 0.0, grad.weights[l].as_mut_slice());
        let gb = &mut grad.biases[l];
        gb.iter_mut().for_each(|v| *v = 0.0);
        for row in delta.chunks_exact(fan_out) {
            for (g, d) in gb.iter_mut().zip(row) {
                *g += d;
            }
        }
        if l > 0 {
            let mut prev = vec![0.0; batch * fan_in];
            gemm(batch, fan_out, fan_in, 1.0, &delta, false, w.as_slice(), true, 0.0, &mut prev);
            for (p, a) in prev.iter_mut().zip(&fwd.acts[l]) {
                *p *= 1.0 - a * a;
            }
            delta = prev;
        }
    }
}

/// Mean cross-entropy of a batch and its gradient with respect to every
/// weight and bias.
pub fn ann_backprop_gradient(layers: &Layers, x: &Matrix, y: &[usize]) -> (f64, Layers) {
    let sizes = layers.sizes();
    let classes = *sizes.last().unwrap();
    let fwd = forward(layers, x.as_slice(), x.rows());
    let loss = cross_entropy(&fwd.acts[sizes.len() - 1], y, classes);
    let mut grad = Layers::zeros(&sizes);
    backward(layers, &fwd, y, &mut grad);
    (loss, grad)
}

/// Loss of a batch without the gradient.
pub fn ann_loss(layers: &Layers, x: &Matrix, y: &[usize]) -> f64 {
    let sizes = layers.sizes();
    let fwd = forward(layers, x.as_slice(), x.rows());
    cross_entropy(&fwd.acts[sizes.len() - 1], y, *sizes.last().unwrap())
}

struct Adam {
    m: Layers,
    v: Layers,
    step: i32,
}

impl Adam {
    fn apply(&mut self, layers: &mut Layers, grad: &Layers, p: &AnnParams) {
        self.step += 1;
        let c1 = 1.0 - libm::pow(p.beta1, self.step as f64);
        let c2 = 1.0 - libm::pow(p.beta2, self.step as f64);
        let lr = p.learning_rate * libm::sqrt(c2) / c1;
        for (((w, g), m), v) in layers.iter_mut().zip(grad.iter()).zip(self.m.iter_mut()).zip(self.v.iter_mut()) {
            *m = p.beta1 * *m + (1.0 - p.beta1) * g;
            *v = p.beta2 * *v + (1.0 - p.beta2) * g * g;
            *w -= lr * *m / (libm::sqrt(*v) + p.epsilon);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    params: AnnParams,
    layers: Layers,
}

impl Mlp {
    /// Trains a network and returns it with the mean training loss of every
    /// epoch.
    pub fn fit(data: &LabeledSet, params: &AnnParams, seed: u64) -> Result<(Self, Vec<f64>)> {
        let mut rng = seeded(seed);
        let mut sizes = vec![data.dim()];
        sizes.extend_from_slice(&params.hidden);
        sizes.push(data.n_classes());
        let mut layers = Layers::glorot(&sizes, &mut rng);
        let mut grad = Layers::zeros(&sizes);
        let mut adam = Adam { m: Layers::zeros(&sizes), v: Layers::zeros(&sizes), step: 0 };

        let n = data.len();
        let d = data.dim();
        let batch = params.batch_size.min(n);
        let mut order: Vec<usize> = (0..n).collect();
        let mut xb = Vec::with_capacity(batch * d);
        let mut yb = Vec::with_capacity(batch);
        let mut curve = Vec::with_capacity(params.epochs);
        for epoch in 0..params.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for chunk in order.chunks(batch) {
                xb.clear();
                yb.clear();
                for &i in chunk {
                    xb.extend_from_slice(data.x().row(i));
                    yb.push(data.y()[i]);
                }
                let fwd = forward(&layers, &xb, chunk.len());
                total += cross_entropy(&fwd.acts[sizes.len() - 1], &yb, data.n_classes()) * chunk.len() as f64;
                backward(&layers, &fwd, &yb, &mut grad);
                adam.apply(&mut layers, &grad, params);
            }
            let loss = total / n as f64;
            if !loss.is_finite() {
                return Err(Error::NonConvergence { iterations: epoch + 1, gap: loss });
            }
            curve.push(loss);
        }
        Ok((Self { params: params.clone(), layers }, curve))
    }

    pub fn layers(&self) -> &Layers {
        &self.layers
    }

    pub fn params(&self) -> &AnnParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.layers.weights[0].rows()
    }

    pub fn n_classes(&self) -> usize {
        self.layers.weights.last().map_or(0, Matrix::cols)
    }

    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        let fwd = forward(&self.layers, x.as_slice(), x.rows());
        let out = fwd.acts.into_iter().last().unwrap_or_default();
        Matrix::from_vec(x.rows(), self.n_classes(), out).expect("softmax output shape")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_is_uniform() {
        let layers = Layers::zeros(&[3, 4, 4, 5]);
        let x = Matrix::zeros(6, 3);
        let y = [0, 1, 2, 3, 4, 0];
        let (loss, grad) = ann_backprop_gradient(&layers, &x, &y);
        assert!((loss - libm::log(5.0)).abs() < 1e-15);
        // output bias gradient = mean(uniform - one_hot)
        let want = [0.2 - 2.0 / 6.0, 0.2 - 1.0 / 6.0, 0.2 - 1.0 / 6.0, 0.2 - 1.0 / 6.0, 0.2 - 1.0 / 6.0];
        for (g, w) in grad.biases[2].iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert!(grad.weights.iter().all(|w| w.as_slice().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn parameter_iteration_covers_every_value() {
        let layers = Layers::zeros(&[3, 5, 5, 2]);
        assert_eq!(layers.iter().count(), 3 * 5 + 5 + 5 * 5 + 5 + 5 * 2 + 2);
    }
}
