use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use super::argmax_count;
use crate::data::LabeledMatrix;
use crate::error::{Error, Result};

/// Brute-force k-nearest-neighbour classifier over the stored training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    features: Array2<f64>,
    labels: Vec<i64>,
    channel_ids: Vec<usize>,
    classes: Vec<i64>,
    dense: Vec<usize>,
    k: usize,
}

impl KnnModel {
    pub fn fit(train: &LabeledMatrix, k: usize) -> Result<Self> {
        if k == 0 || k > train.rows() {
            return Err(Error::InvalidParameter(format!(
                "knn_k={k} needs 1..={} training rows",
                train.rows()
            )));
        }
        let (classes, dense) = train.dense_labels();
        if classes.len() == 2 && k.is_multiple_of(2) {
            log::warn!("knn_k={k} is even for a two-class problem; votes may tie");
        }
        Ok(Self {
            features: train.features().clone(),
            labels: train.labels().to_vec(),
            channel_ids: train.channel_ids().to_vec(),
            classes,
            dense,
            k,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn channel_ids(&self) -> &[usize] {
        &self.channel_ids
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn predict_one(&self, x: ArrayView1<'_, f64>) -> i64 {
        let dist: Vec<f64> = self
            .features
            .rows()
            .into_iter()
            .map(|row| {
                let mut s = 0.0;
                for (a, b) in row.iter().zip(x.iter()) {
                    s += (a - b) * (a - b);
                }
                s
            })
            .collect();
        self.classes[vote(&dist, &self.dense, self.classes.len(), self.k)]
    }

    pub(crate) fn predict_rows(&self, test: &LabeledMatrix) -> Vec<i64> {
        (0..test.rows())
            .into_par_iter()
            .map(|i| self.predict_one(test.row(i)))
            .collect()
    }
}

/// Majority class among the `k` smallest distances. Equal distances prefer
/// the lower row; equal votes prefer the lower class index.
pub(crate) fn vote(dist: &[f64], dense: &[usize], n_classes: usize, k: usize) -> usize {
    // sorted buffer of the best (distance, row) pairs seen so far
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (j, &d) in dist.iter().enumerate() {
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(bd, _)| bd <= d);
        best.insert(pos, (d, j));
        best.truncate(k);
    }
    let mut counts = vec![0usize; n_classes];
    for &(_, j) in &best {
        counts[dense[j]] += 1;
    }
    argmax_count(&counts)
}
