use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{majority, LabeledSet};
use crate::matrix::Matrix;

/// k-nearest neighbours under Euclidean distance. Equidistant neighbours
/// are ordered by class index, then by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    n_classes: usize,
    x: Matrix,
    y: Vec<usize>,
}

impl Knn {
    pub fn fit(data: &LabeledSet, k: usize) -> Self {
        Self { k, n_classes: data.n_classes(), x: data.x().clone(), y: data.y().to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn neighbour_counts(&self, q: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize, usize)> = self
            .x
            .iter_rows()
            .zip(&self.y)
            .enumerate()
            .map(|(i, (r, &c))| (r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), c, i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        };
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, cmp);
        }
        let mut counts = alloc::vec![0; self.n_classes];
        for &(_, c, _) in &d[..k] {
            counts[c] += 1;
        }
        counts
    }

    pub fn predict_row(&self, q: &[f64]) -> usize {
        majority(&self.neighbour_counts(q))
    }

    pub fn vote_shares(&self, q: &[f64]) -> Vec<f64> {
        let counts = self.neighbour_counts(q);
        let total: usize = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn one_nn_recovers_training_labels() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]]).unwrap();
        let data = LabeledSet::new(x.clone(), vec![0, 1, 2, 1]).unwrap();
        let m = Knn::fit(&data, 1);
        let pred: Vec<usize> = x.iter_rows().map(|r| m.predict_row(r)).collect();
        assert_eq!(pred, vec![0, 1, 2, 1]);
    }

    #[test]
    fn equidistant_neighbours_prefer_lower_class() {
        let x = Matrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let data = LabeledSet::new(x, vec![1, 0]).unwrap();
        assert_eq!(Knn::fit(&data, 1).predict_row(&[0.0]), 0);
    }

    #[test]
    fn k3_majority_vote() {
        let x = Matrix::from_rows(&[[0.0], [0.1], [0.2], [10.0]]).unwrap();
        let data = LabeledSet::new(x, vec![1, 1, 0, 0]).unwrap();
        let m = Knn::fit(&data, 3);
        assert_eq!(m.predict_row(&[0.05]), 1);
        let s = m.vote_shares(&[0.05]);
        assert!((s[1] - 2.0 / 3.0).abs() < 1e-12);
    }
}
