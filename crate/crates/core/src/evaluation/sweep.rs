//! Top-n prefix sweep over a ranking.
//!
//! [`prefix_accuracies`] shares work across prefixes (running kNN distances,
//! one LDA scatter, one presort for trees) but produces exactly the numbers
//! that fitting each projected prefix from scratch does; the from-scratch
//! version is [`prefix_accuracies_reference`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::knn::vote;
use crate::classifiers::{self, percent, ClassifierKind, ClassifierSpec, KnnModel, LdaStats, TreeTrainer};
use crate::data::{project_channels, LabeledMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `(n, accuracy %)` for `n = 1..=len(ranking)`.
    pub per_n: Vec<(usize, f64)>,
    pub best_n: usize,
    pub best_accuracy: f64,
    pub baseline_accuracy: f64,
}

impl SweepResult {
    /// Best = highest accuracy, ties to the smallest `n`.
    pub fn from_curve(accuracies: &[f64], baseline_accuracy: f64) -> Result<Self> {
        if accuracies.is_empty() {
            return Err(Error::InvalidParameter("sweep over an empty ranking".into()));
        }
        let mut best = 0;
        for (i, &a) in accuracies.iter().enumerate() {
            if a > accuracies[best] {
                best = i;
            }
        }
        Ok(Self {
            per_n: accuracies.iter().enumerate().map(|(i, &a)| (i + 1, a)).collect(),
            best_n: best + 1,
            best_accuracy: accuracies[best],
            baseline_accuracy,
        })
    }
}

/// Accuracy divided by the number of selected features.
pub fn rho(ca_percent: f64, n_features: f64) -> Result<f64> {
    if n_features.is_nan() || n_features <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rho needs a positive feature count, got {n_features}"
        )));
    }
    Ok(ca_percent / n_features)
}

pub fn sweep(
    ranking: &[usize],
    train: &LabeledMatrix,
    test: &LabeledMatrix,
    spec: &ClassifierSpec,
) -> Result<SweepResult> {
    let curve = prefix_accuracies(ranking, train, test, spec)?;
    let baseline = baseline_accuracy(train, test, spec)?;
    SweepResult::from_curve(&curve, baseline)
}

/// Fit and score on every channel, in the matrices' own column order.
pub fn baseline_accuracy(train: &LabeledMatrix, test: &LabeledMatrix, spec: &ClassifierSpec) -> Result<f64> {
    check_compatible(train, test)?;
    let model = classifiers::fit(spec, train)?;
    classifiers::accuracy(&classifiers::predict(&model, test)?, test.labels())
}

fn check_compatible(train: &LabeledMatrix, test: &LabeledMatrix) -> Result<()> {
    if train.channel_ids() != test.channel_ids() {
        return Err(Error::ChannelMismatch {
            train: train.channel_ids().to_vec(),
            test: test.channel_ids().to_vec(),
        });
    }
    Ok(())
}

/// Accuracy of a model fitted on each projected prefix of `ranking`, one
/// fit per prefix.
pub fn prefix_accuracies_reference(
    ranking: &[usize],
    train: &LabeledMatrix,
    test: &LabeledMatrix,
    spec: &ClassifierSpec,
) -> Result<Vec<f64>> {
    check_compatible(train, test)?;
    (1..=ranking.len())
        .map(|n| {
            let tr = project_channels(train, &ranking[..n])?;
            let te = project_channels(test, &ranking[..n])?;
            let model = classifiers::fit(spec, &tr)?;
            classifiers::accuracy(&classifiers::predict(&model, &te)?, te.labels())
        })
        .enumerate()
        .map(|(i, r)| r.map_err(|e| e.at_prefix(i + 1)))
        .collect()
}

pub fn prefix_accuracies(
    ranking: &[usize],
    train: &LabeledMatrix,
    test: &LabeledMatrix,
    spec: &ClassifierSpec,
) -> Result<Vec<f64>> {
    check_compatible(train, test)?;
    spec.validate()?;
    if ranking.is_empty() {
        return Err(Error::InvalidParameter("sweep over an empty ranking".into()));
    }
    let tr = project_channels(train, ranking)?;
    let te = project_channels(test, ranking)?;
    tr.require_supervised().map_err(|e| e.at_prefix(1))?;
    match spec.kind {
        ClassifierKind::Knn => knn_curve(&tr, &te, spec.knn_k),
        ClassifierKind::Lda => {
            let stats = LdaStats::compute(&tr).map_err(|e| e.at_prefix(1))?;
            (1..=ranking.len())
                .into_par_iter()
                .map(|n| {
                    let model = stats.model(n, spec.lda_ridge).map_err(|e| e.at_prefix(n))?;
                    // discriminants only read the leading n entries of a row
                    let hits = (0..te.rows())
                        .filter(|&i| model.predict_one(te.row(i)) == te.labels()[i])
                        .count();
                    Ok(percent(hits, te.rows()))
                })
                .collect()
        }
        ClassifierKind::Tree => {
            let trainer = TreeTrainer::new(&tr).map_err(|e| e.at_prefix(1))?;
            Ok((1..=ranking.len())
                .into_par_iter()
                .map(|n| {
                    let model = trainer.fit(n, spec.tree_max_depth, spec.tree_min_leaf);
                    let hits = (0..te.rows())
                        .filter(|&i| model.predict_one(te.row(i)) == te.labels()[i])
                        .count();
                    percent(hits, te.rows())
                })
                .collect())
        }
    }
}

/// Running squared distances: prefix `n` adds column `n - 1` to every
/// test-to-train distance, in the same order a fresh fit would sum them.
fn knn_curve(tr: &LabeledMatrix, te: &LabeledMatrix, k: usize) -> Result<Vec<f64>> {
    // validates k against the training size
    KnnModel::fit(tr, k).map_err(|e| e.at_prefix(1))?;
    let (classes, dense) = tr.dense_labels();
    let columns: Vec<Vec<f64>> = (0..tr.channels()).map(|c| tr.features().column(c).to_vec()).collect();
    let n_max = columns.len();
    let hits_per_row: Vec<Vec<bool>> = (0..te.rows())
        .into_par_iter()
        .map(|i| {
            let x = te.row(i);
            let truth = te.labels()[i];
            let mut dist = vec![0.0; tr.rows()];
            let mut hits = Vec::with_capacity(n_max);
            for (p, col) in columns.iter().enumerate() {
                let xp = x[p];
                for (d, &a) in dist.iter_mut().zip(col) {
                    *d += (a - xp) * (a - xp);
                }
                hits.push(classes[vote(&dist, &dense, classes.len(), k)] == truth);
            }
            hits
        })
        .collect();
    let mut counts = vec![0usize; n_max];
    for row in &hits_per_row {
        for (c, &h) in counts.iter_mut().zip(row) {
            *c += h as usize;
        }
    }
    Ok(counts.into_iter().map(|c| percent(c, te.rows())).collect())
}
