//! Six multi-class classifiers behind one train/predict interface.
//!
//! Defaults follow the tuned values: 1-NN; linear SVM with `C = 1`, one
//! binary problem per class; Gini tree split down to two samples; 100-tree
//! forest of depth 30; Gaussian naive Bayes; a 500-500 tanh network with a
//! softmax output, trained by Adam at a 0.001 learning rate.

pub mod ann;
pub mod knn;
pub mod nb;
pub mod svm;
pub mod tree;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use ann::{ann_backprop_gradient, AnnParams, Mlp};
pub use knn::Knn;
pub use nb::GaussianNb;
pub use svm::{svm_fit_binary, BinarySvm, OneVsRestSvm};
pub use tree::{DecisionTree, RandomForest, TreeParams};

/// Feature rows with class labels in `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    x: Matrix,
    y: Vec<usize>,
    n_classes: usize,
}

impl LabeledSet {
    /// Class count is `max(y) + 1` and every class must be present.
    pub fn new(x: Matrix, y: Vec<usize>) -> Result<Self> {
        let n_classes = y.iter().max().map_or(0, |m| m + 1);
        let set = Self::with_class_count(x, y, n_classes)?;
        if set.class_counts().contains(&0) {
            return Err(Error::validation("every class needs at least one row"));
        }
        if set.len() < n_classes {
            return Err(Error::validation("fewer rows than classes"));
        }
        Ok(set)
    }

    /// Labels index a wider class space. Classes may be absent (a training
    /// fold that holds none of a subject's strides), but at least two must
    /// be present.
    pub fn with_class_count(x: Matrix, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.rows(), got: y.len() });
        }
        if !x.is_finite() {
            return Err(Error::validation("feature matrix contains non-finite values"));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::Validation(alloc::format!("label {bad} outside 0..{n_classes}")));
        }
        let set = Self { x, y, n_classes };
        if set.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::validation("need at least two classes"));
        }
        Ok(set)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = alloc::vec![0; self.n_classes];
        for &l in &self.y {
            c[l] += 1;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Svm,
    Dt,
    Rf,
    Nb,
    Ann,
}

impl ClassifierKind {
    /// Column order of the accuracy table.
    pub const ALL: [ClassifierKind; 6] =
        [ClassifierKind::Knn, ClassifierKind::Svm, ClassifierKind::Dt, ClassifierKind::Rf, ClassifierKind::Nb, ClassifierKind::Ann];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Dt => "DT",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Nb => "NB",
            ClassifierKind::Ann => "ANN",
        }
    }

    pub fn default_spec(self) -> ClassifierSpec {
        match self {
            ClassifierKind::Knn => ClassifierSpec::Knn { k: 1 },
            ClassifierKind::Svm => ClassifierSpec::Svm { c: 1.0 },
            ClassifierKind::Dt => ClassifierSpec::Dt(TreeParams::default()),
            ClassifierKind::Rf => ClassifierSpec::Rf { trees: 100, max_depth: Some(30), features_per_split: None, bootstrap: true },
            ClassifierKind::Nb => ClassifierSpec::Nb { var_smoothing: 1e-9 },
            ClassifierKind::Ann => ClassifierSpec::Ann(AnnParams::default()),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Validation(alloc::format!("unknown classifier {s:?}")))
    }
}

/// Classifier and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSpec {
    Knn { k: usize },
    /// Linear kernel, one-vs-rest.
    Svm { c: f64 },
    Dt(TreeParams),
    Rf {
        trees: usize,
        max_depth: Option<usize>,
        /// `None` means `ceil(sqrt(d))`.
        features_per_split: Option<usize>,
        bootstrap: bool,
    },
    /// Variance floor is `var_smoothing` times the largest feature variance.
    Nb { var_smoothing: f64 },
    Ann(AnnParams),
}

impl ClassifierSpec {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::Knn { .. } => ClassifierKind::Knn,
            ClassifierSpec::Svm { .. } => ClassifierKind::Svm,
            ClassifierSpec::Dt(_) => ClassifierKind::Dt,
            ClassifierSpec::Rf { .. } => ClassifierKind::Rf,
            ClassifierSpec::Nb { .. } => ClassifierKind::Nb,
            ClassifierSpec::Ann(_) => ClassifierKind::Ann,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ClassifierSpec::Knn { k } => *k >= 1,
            ClassifierSpec::Svm { c } => *c > 0.0 && c.is_finite(),
            ClassifierSpec::Dt(p) => p.min_samples_split >= 2,
            ClassifierSpec::Rf { trees, features_per_split, .. } => *trees >= 1 && features_per_split.is_none_or(|m| m >= 1),
            ClassifierSpec::Nb { var_smoothing } => *var_smoothing >= 0.0,
            ClassifierSpec::Ann(p) => p.validate(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(alloc::format!("invalid classifier parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum TrainedModel {
    Knn(Knn),
    Svm(OneVsRestSvm),
    Dt(DecisionTree),
    Rf(RandomForest),
    Nb(GaussianNb),
    Ann(Mlp),
}

/// Fits `spec` on `data`. All randomness comes from `seed`.
pub fn train(spec: &ClassifierSpec, data: &LabeledSet, seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    Ok(match spec {
        ClassifierSpec::Knn { k } => TrainedModel::Knn(Knn::fit(data, *k)),
        ClassifierSpec::Svm { c } => TrainedModel::Svm(OneVsRestSvm::fit(data, *c)?),
        ClassifierSpec::Dt(p) => TrainedModel::Dt(DecisionTree::fit(data, p)),
        ClassifierSpec::Rf { trees, max_depth, features_per_split, bootstrap } => {
            let m = features_per_split.unwrap_or_else(|| libm::ceil(libm::sqrt(data.dim() as f64)) as usize);
            TrainedModel::Rf(RandomForest::fit(data, *trees, *max_depth, m.clamp(1, data.dim().max(1)), *bootstrap, seed))
        }
        ClassifierSpec::Nb { var_smoothing } => TrainedModel::Nb(GaussianNb::fit(data, *var_smoothing)),
        ClassifierSpec::Ann(p) => TrainedModel::Ann(Mlp::fit(data, p, seed)?.0),
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Knn(_) => ClassifierKind::Knn,
            TrainedModel::Svm(_) => ClassifierKind::Svm,
            TrainedModel::Dt(_) => ClassifierKind::Dt,
            TrainedModel::Rf(_) => ClassifierKind::Rf,
            TrainedModel::Nb(_) => ClassifierKind::Nb,
            TrainedModel::Ann(_) => ClassifierKind::Ann,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.dim(),
            TrainedModel::Svm(m) => m.dim(),
            TrainedModel::Dt(m) => m.dim(),
            TrainedModel::Rf(m) => m.dim(),
            TrainedModel::Nb(m) => m.dim(),
            TrainedModel::Ann(m) => m.dim(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.n_classes(),
            TrainedModel::Svm(m) => m.n_classes(),
            TrainedModel::Dt(m) => m.n_classes(),
            TrainedModel::Rf(m) => m.n_classes(),
            TrainedModel::Nb(m) => m.n_classes(),
            TrainedModel::Ann(m) => m.n_classes(),
        }
    }

    /// One class index per row. Ties go to the lowest class index.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.cols() });
        }
        Ok(match self {
            TrainedModel::Knn(m) => x.iter_rows().map(|r| m.predict_row(r)).collect(),
            TrainedModel::Svm(m) => x.iter_rows().map(|r| m.predict_row(r)).collect(),
            TrainedModel::Dt(m) => x.iter_rows().map(|r| m.predict_row(r)).collect(),
            TrainedModel::Rf(m) => x.iter_rows().map(|r| m.predict_row(r)).collect(),
            TrainedModel::Nb(m) => x.iter_rows().map(|r| argmax(&m.predict_proba_row(r))).collect(),
            TrainedModel::Ann(m) => m.predict_proba(x).iter_rows().map(argmax).collect(),
        })
    }

    /// Class probabilities for the models that define them: vote shares for
    /// KNN and RF, posteriors for NB, softmax outputs for the network.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Option<Matrix>> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.cols() });
        }
        let rows = |f: &dyn Fn(&[f64]) -> Vec<f64>| -> Result<Matrix> {
            let r: Vec<Vec<f64>> = x.iter_rows().map(f).collect();
            if r.is_empty() {
                return Ok(Matrix::zeros(0, self.n_classes()));
            }
            Matrix::from_rows(&r)
        };
        Ok(match self {
            TrainedModel::Knn(m) => Some(rows(&|r| m.vote_shares(r))?),
            TrainedModel::Rf(m) => Some(rows(&|r| m.vote_shares(r))?),
            TrainedModel::Nb(m) => Some(rows(&|r| m.predict_proba_row(r))?),
            TrainedModel::Ann(m) => Some(m.predict_proba(x)),
            TrainedModel::Svm(_) | TrainedModel::Dt(_) => None,
        })
    }
}

/// Index of the largest value, first one on ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Most frequent label, lowest index on ties.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_set_rejects_single_class() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(LabeledSet::new(x.clone(), alloc::vec![0, 0]).is_err());
        assert!(LabeledSet::new(x.clone(), alloc::vec![0, 2]).is_err());
        assert!(LabeledSet::with_class_count(x.clone(), alloc::vec![0, 2], 3).is_ok());
        assert!(LabeledSet::new(x, alloc::vec![1, 0]).is_ok());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(majority(&[2, 3, 3, 1]), 1);
    }

    #[test]
    fn names_parse() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().to_ascii_lowercase().parse::<ClassifierKind>().unwrap(), k);
            assert_eq!(k.default_spec().kind(), k);
        }
    }
}
