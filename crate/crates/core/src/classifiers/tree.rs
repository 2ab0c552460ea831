//! CART classification trees (Gini impurity) and bagged random forests.
//!
//! Thresholds are midpoints between adjacent distinct values; a row goes
//! left when its value is at most the threshold. Among equally good splits
//! the lowest feature index wins, then the lowest threshold.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{majority, LabeledSet};
use crate::rng::{derive_seed, seeded, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_samples_split: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { min_samples_split: 2, max_depth: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf { label: usize },
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    dim: usize,
    n_classes: usize,
    nodes: Vec<Node>,
}

/// How a node chooses the features it may split on.
enum FeaturePick<'a> {
    All,
    Random { per_split: usize, rng: &'a mut Rng },
}

struct Builder<'a> {
    data: &'a LabeledSet,
    params: TreeParams,
    pick: FeaturePick<'a>,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Builder<'_> {
    fn build(&mut self, rows: &mut [usize], depth: usize) -> u32 {
        let mut counts = vec![0usize; self.data.n_classes()];
        for &r in rows.iter() {
            counts[self.data.y()[r]] += 1;
        }
        let id = self.nodes.len() as u32;
        let leaf = Node::Leaf { label: majority(&counts) };
        self.nodes.push(leaf);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < self.params.min_samples_split || self.params.max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(rows, &counts) else {
            return id;
        };
        let x = self.data.x();
        let mut split = 0;
        for i in 0..rows.len() {
            if x.get(rows[i], feature) <= threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = rows.split_at_mut(split);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id as usize] = Node::Split { feature, threshold, left, right };
        id
    }

    fn candidate_features(&mut self, rows: &[usize]) -> Vec<usize> {
        let d = self.data.dim();
        match &mut self.pick {
            FeaturePick::All => (0..d).collect(),
            FeaturePick::Random { per_split, rng } => {
                // visit features in random order; keep the first `per_split`
                // that vary inside this node
                let mut perm: Vec<usize> = (0..d).collect();
                let mut chosen = Vec::with_capacity(*per_split);
                for i in 0..d {
                    let j = rng.random_range(i..d);
                    perm.swap(i, j);
                    let f = perm[i];
                    let x = self.data.x();
                    let first = x.get(rows[0], f);
                    if rows.iter().any(|&r| x.get(r, f) != first) {
                        chosen.push(f);
                        if chosen.len() == *per_split {
                            break;
                        }
                    }
                }
                chosen.sort_unstable();
                chosen
            }
        }
    }

    /// Minimises `n_l * gini_l + n_r * gini_r`.
    fn best_split(&mut self, rows: &[usize], counts: &[usize]) -> Option<(usize, f64)> {
        let features = self.candidate_features(rows);
        let x = self.data.x();
        let y = self.data.y();
        let n = rows.len() as f64;
        let total_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut left = vec![0usize; counts.len()];
        for f in features {
            self.order.clear();
            self.order.extend_from_slice(rows);
            self.order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            left.iter_mut().for_each(|c| *c = 0);
            let (mut sq_l, mut sq_r) = (0.0, total_sq);
            for k in 0..self.order.len() - 1 {
                let r = self.order[k];
                let c = y[r];
                // moving one row of class c from right to left
                sq_l += (2 * left[c] + 1) as f64;
                sq_r -= (2 * (counts[c] - left[c]) - 1) as f64;
                left[c] += 1;
                let (a, b) = (x.get(r, f), x.get(self.order[k + 1], f));
                if a == b {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let score = (nl - sq_l / nl) + (nr - sq_r / nr);
                if best.is_none_or(|(s, _, _)| score < s) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl DecisionTree {
    pub fn fit(data: &LabeledSet, params: &TreeParams) -> Self {
        let rows: Vec<usize> = (0..data.len()).collect();
        Self::fit_rows(data, *params, rows, FeaturePick::All)
    }

    fn fit_rows(data: &LabeledSet, params: TreeParams, mut rows: Vec<usize>, pick: FeaturePick<'_>) -> Self {
        let mut b = Builder { data, params, pick, nodes: Vec::new(), order: Vec::with_capacity(rows.len()) };
        b.build(&mut rows, 0);
        Self { dim: data.dim(), n_classes: data.n_classes(), nodes: b.nodes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { label } => return label,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left as usize } else { right as usize };
                }
            }
        }
    }
}

/// Majority vote over trees grown on bootstrap samples with random feature
/// subsets at each split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    dim: usize,
    n_classes: usize,
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(
        data: &LabeledSet,
        n_trees: usize,
        max_depth: Option<usize>,
        features_per_split: usize,
        bootstrap: bool,
        seed: u64,
    ) -> Self {
        let params = TreeParams { min_samples_split: 2, max_depth };
        let n = data.len();
        let all_features = features_per_split >= data.dim();
        let trees = (0..n_trees)
            .map(|t| {
                let mut rng = seeded(derive_seed(seed, t as u64));
                let rows: Vec<usize> =
                    if bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
                let pick = if all_features {
                    FeaturePick::All
                } else {
                    FeaturePick::Random { per_split: features_per_split, rng: &mut rng }
                };
                DecisionTree::fit_rows(data, params, rows, pick)
            })
            .collect();
        Self { dim: data.dim(), n_classes: data.n_classes(), trees }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut v = vec![0; self.n_classes];
        for t in &self.trees {
            v[t.predict_row(x)] += 1;
        }
        v
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        majority(&self.votes(x))
    }

    pub fn vote_shares(&self, x: &[f64]) -> Vec<f64> {
        let n = self.trees.len() as f64;
        self.votes(x).iter().map(|&c| c as f64 / n).collect()
    }
}
