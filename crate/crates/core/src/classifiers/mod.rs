//! Built-in classifiers behind one fit/predict interface.
//!
//! kNN, Gaussian LDA with pooled covariance, and a CART tree. Every tie rule
//! resolves toward the lowest index or label so results do not depend on
//! platform or thread count.

pub mod knn;
pub mod lda;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::LabeledMatrix;
use crate::error::{Error, Result};

pub use knn::KnnModel;
pub use lda::{LdaModel, LdaStats};
pub use tree::{TreeModel, TreeNode, TreeTrainer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Lda,
    Tree,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Knn, ClassifierKind::Lda, ClassifierKind::Tree];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Lda => "lda",
            ClassifierKind::Tree => "tree",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown classifier {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub knn_k: usize,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    /// Ridge added to the pooled covariance, relative to its mean diagonal.
    pub lda_ridge: f64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::Knn,
            knn_k: 3,
            tree_max_depth: 10,
            tree_min_leaf: 5,
            lda_ridge: 1e-6,
        }
    }
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 {
            return Err(Error::InvalidParameter("knn_k must be positive".into()));
        }
        if self.tree_max_depth == 0 || self.tree_min_leaf == 0 {
            return Err(Error::InvalidParameter(
                "tree_max_depth and tree_min_leaf must be positive".into(),
            ));
        }
        if !(self.lda_ridge >= 0.0 && self.lda_ridge.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lda_ridge must be a non-negative number, got {}",
                self.lda_ridge
            )));
        }
        Ok(())
    }
}

/// A trained predictor. Immutable after [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Knn(KnnModel),
    Lda(LdaModel),
    Tree(TreeModel),
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::Knn(_) => ClassifierKind::Knn,
            ClassifierModel::Lda(_) => ClassifierKind::Lda,
            ClassifierModel::Tree(_) => ClassifierKind::Tree,
        }
    }

    pub fn channel_ids(&self) -> &[usize] {
        match self {
            ClassifierModel::Knn(m) => m.channel_ids(),
            ClassifierModel::Lda(m) => m.channel_ids(),
            ClassifierModel::Tree(m) => m.channel_ids(),
        }
    }
}

pub fn fit(spec: &ClassifierSpec, train: &LabeledMatrix) -> Result<ClassifierModel> {
    spec.validate()?;
    train.require_supervised()?;
    Ok(match spec.kind {
        ClassifierKind::Knn => ClassifierModel::Knn(KnnModel::fit(train, spec.knn_k)?),
        ClassifierKind::Lda => ClassifierModel::Lda(LdaStats::compute(train)?.model(train.channels(), spec.lda_ridge)?),
        ClassifierKind::Tree => ClassifierModel::Tree(
            TreeTrainer::new(train)?.fit(train.channels(), spec.tree_max_depth, spec.tree_min_leaf),
        ),
    })
}

pub fn predict(model: &ClassifierModel, test: &LabeledMatrix) -> Result<Vec<i64>> {
    check_channels(model.channel_ids(), test)?;
    Ok(match model {
        ClassifierModel::Knn(m) => m.predict_rows(test),
        ClassifierModel::Lda(m) => m.predict_rows(test),
        ClassifierModel::Tree(m) => m.predict_rows(test),
    })
}

/// Percentage of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[i64], truth: &[i64]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidParameter("accuracy of an empty label vector".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(percent(hits, truth.len()))
}

pub(crate) fn percent(hits: usize, total: usize) -> f64 {
    100.0 * hits as f64 / total as f64
}

pub(crate) fn check_channels(trained: &[usize], test: &LabeledMatrix) -> Result<()> {
    if trained != test.channel_ids() {
        return Err(Error::ChannelMismatch {
            train: trained.to_vec(),
            test: test.channel_ids().to_vec(),
        });
    }
    Ok(())
}

/// Index of the largest count, ties to the lowest index.
pub(crate) fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
