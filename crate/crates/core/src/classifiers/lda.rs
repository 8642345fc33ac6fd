//! Gaussian linear discriminant analysis with a pooled covariance.
//!
//! The discriminant for class `k` is `xᵀΣ⁻¹μ_k − ½μ_kᵀΣ⁻¹μ_k + ln π_k` with
//! empirical priors `π_k`. Σ is the pooled within-class covariance plus
//! `ridge · mean(diag Σ) · I`, factored by Cholesky; a failed factorization
//! is reported as [`Error::SingularCovariance`].

use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView1;
use rayon::prelude::*;

use crate::data::LabeledMatrix;
use crate::error::{Error, Result};

/// Class means and pooled scatter of a training matrix.
///
/// Every scatter entry `(a, b)` depends only on columns `a` and `b`, so the
/// model for the leading `n` columns is the same whether it is built from
/// these statistics or from a matrix holding only those columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaStats {
    channel_ids: Vec<usize>,
    classes: Vec<i64>,
    counts: Vec<usize>,
    means: Vec<Vec<f64>>,
    scatter: Vec<f64>,
    rows: usize,
}

impl LdaStats {
    pub fn compute(train: &LabeledMatrix) -> Result<Self> {
        train.require_supervised()?;
        let (classes, dense) = train.dense_labels();
        let c = train.channels();
        let k = classes.len();
        let mut counts = vec![0usize; k];
        for &y in &dense {
            counts[y] += 1;
        }
        if let Some(pos) = counts.iter().position(|&n| n < 2) {
            return Err(Error::DegenerateClasses(format!(
                "LDA needs at least 2 rows per class; class {} has {}",
                classes[pos], counts[pos]
            )));
        }
        let mut means = vec![vec![0.0; c]; k];
        for (row, &y) in train.features().rows().into_iter().zip(&dense) {
            for (m, v) in means[y].iter_mut().zip(row.iter()) {
                *m += v;
            }
        }
        for (m, &n) in means.iter_mut().zip(&counts) {
            for v in m.iter_mut() {
                *v /= n as f64;
            }
        }
        let mut scatter = vec![0.0; c * c];
        let mut centred = vec![0.0; c];
        for (row, &y) in train.features().rows().into_iter().zip(&dense) {
            for ((z, v), m) in centred.iter_mut().zip(row.iter()).zip(&means[y]) {
                *z = v - m;
            }
            for a in 0..c {
                for b in a..c {
                    scatter[a * c + b] += centred[a] * centred[b];
                }
            }
        }
        for a in 0..c {
            for b in 0..a {
                scatter[a * c + b] = scatter[b * c + a];
            }
        }
        Ok(Self {
            channel_ids: train.channel_ids().to_vec(),
            classes,
            counts,
            means,
            scatter,
            rows: train.rows(),
        })
    }

    pub fn channels(&self) -> usize {
        self.channel_ids.len()
    }

    /// Model on the leading `n` channels.
    pub fn model(&self, n: usize, ridge: f64) -> Result<LdaModel> {
        let c = self.channels();
        if n == 0 || n > c {
            return Err(Error::InvalidParameter(format!("LDA prefix {n} outside 1..={c}")));
        }
        let dof = (self.rows - self.classes.len()) as f64;
        let mut cov = DMatrix::from_fn(n, n, |a, b| self.scatter[a * c + b] / dof);
        let mut diag_sum = 0.0;
        for a in 0..n {
            diag_sum += cov[(a, a)];
        }
        let lambda = ridge * diag_sum / n as f64;
        for a in 0..n {
            cov[(a, a)] += lambda;
        }
        let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
        let mut weights = Vec::with_capacity(self.classes.len());
        let mut biases = Vec::with_capacity(self.classes.len());
        let mut priors = Vec::with_capacity(self.classes.len());
        let means: Vec<Vec<f64>> = self.means.iter().map(|m| m[..n].to_vec()).collect();
        for (mean, &count) in means.iter().zip(&self.counts) {
            let mu = DVector::from_column_slice(mean);
            let w = chol.solve(&mu);
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularCovariance);
            }
            let prior = count as f64 / self.rows as f64;
            let mut quad = 0.0;
            for (m, wv) in mean.iter().zip(w.iter()) {
                quad += m * wv;
            }
            biases.push(-0.5 * quad + prior.ln());
            weights.push(w.iter().copied().collect());
            priors.push(prior);
        }
        Ok(LdaModel {
            channel_ids: self.channel_ids[..n].to_vec(),
            classes: self.classes.clone(),
            means,
            priors,
            weights,
            biases,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    channel_ids: Vec<usize>,
    classes: Vec<i64>,
    means: Vec<Vec<f64>>,
    priors: Vec<f64>,
    /// `Σ⁻¹μ_k` per class.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl LdaModel {
    pub fn channel_ids(&self) -> &[usize] {
        &self.channel_ids
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn discriminants(&self, x: ArrayView1<'_, f64>) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| {
                let mut s = 0.0;
                for (wv, xv) in w.iter().zip(x.iter()) {
                    s += wv * xv;
                }
                s + b
            })
            .collect()
    }

    /// Class with the largest discriminant; exact ties go to the smaller label.
    pub fn predict_one(&self, x: ArrayView1<'_, f64>) -> i64 {
        let d = self.discriminants(x);
        let mut best = 0;
        for (i, &v) in d.iter().enumerate() {
            if v > d[best] {
                best = i;
            }
        }
        self.classes[best]
    }

    pub(crate) fn predict_rows(&self, test: &LabeledMatrix) -> Vec<i64> {
        (0..test.rows())
            .into_par_iter()
            .map(|i| self.predict_one(test.row(i)))
            .collect()
    }
}
