//! Laplacian Score: unsupervised locality-preservation score per channel.
//!
//! Rows become graph nodes joined by a symmetrized kNN graph with heat-kernel
//! weights `exp(-d²/t)`. For a channel column `f`, centred with respect to the
//! degree matrix `D`, the score is `f̃ᵀ L f̃ / f̃ᵀ D f̃` with `L = D - W`. Lower
//! scores mean the channel varies smoothly along the data manifold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{knn_graph, KnnGraph};
use super::{Method, RankingList};
use crate::data::{subsample_rows, LabeledMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaplacianParams {
    pub k_neighbors: usize,
    /// Heat-kernel width; `None` picks the mean squared edge length.
    pub kernel_width: Option<f64>,
    /// Rows beyond this are uniformly subsampled; `None` disables the cap.
    pub subsample_cap: Option<usize>,
    pub seed: u64,
}

impl Default for LaplacianParams {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            kernel_width: None,
            subsample_cap: Some(2000),
            seed: 0,
        }
    }
}

/// Heat-kernel weighted graph with precomputed degrees.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    pub graph: KnnGraph,
    pub kernel_width: f64,
    /// `(i, j, w)` for `i < j`, ascending.
    pub weights: Vec<(usize, usize, f64)>,
    pub degrees: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(graph: KnnGraph, kernel_width: Option<f64>) -> Result<Self> {
        let t = match kernel_width {
            Some(t) if t.is_finite() && t > 0.0 => t,
            Some(t) => {
                return Err(Error::InvalidParameter(format!("kernel width must be positive, got {t}")))
            }
            None => {
                let (sum, count) = graph.edges().fold((0.0, 0usize), |(s, c), (_, _, d)| (s + d, c + 1));
                let mean = sum / count as f64;
                if mean > 0.0 {
                    mean
                } else {
                    1.0
                }
            }
        };
        let weights: Vec<(usize, usize, f64)> =
            graph.edges().map(|(i, j, d)| (i, j, (-d / t).exp())).collect();
        let degrees = (0..graph.nodes())
            .map(|i| graph.neighbors(i).iter().map(|&(_, d)| (-d / t).exp()).sum())
            .collect();
        Ok(Self {
            graph,
            kernel_width: t,
            weights,
            degrees,
        })
    }

    /// Laplacian score of one column, `+inf` for a constant column.
    pub fn score(&self, column: &[f64]) -> f64 {
        let first = column[0];
        if column.iter().all(|&v| v == first) {
            return f64::INFINITY;
        }
        let total: f64 = self.degrees.iter().sum();
        let weighted: f64 = column.iter().zip(&self.degrees).map(|(f, d)| f * d).sum();
        let mean = weighted / total;
        let denom: f64 = column
            .iter()
            .zip(&self.degrees)
            .map(|(f, d)| d * (f - mean) * (f - mean))
            .sum();
        // f̃ᵀLf̃ = Σ_{i<j} w_ij (f_i - f_j)²; the centring shift cancels
        let num: f64 = self
            .weights
            .iter()
            .map(|&(i, j, w)| w * (column[i] - column[j]) * (column[i] - column[j]))
            .sum();
        if denom > 0.0 {
            num / denom
        } else {
            f64::INFINITY
        }
    }
}

pub fn laplacian_rank(matrix: &LabeledMatrix, params: &LaplacianParams) -> Result<RankingList> {
    let sampled;
    let rows = match params.subsample_cap {
        Some(cap) if matrix.rows() > cap => {
            sampled = subsample_rows(matrix, cap, params.seed)?;
            &sampled
        }
        _ => matrix,
    };
    let graph = knn_graph(rows.features(), params.k_neighbors)?;
    let weighted = WeightedGraph::new(graph, params.kernel_width)?;
    let scores: Vec<f64> = (0..rows.channels())
        .into_par_iter()
        .map(|c| weighted.score(&rows.features().column(c).to_vec()))
        .collect();
    Ok(RankingList::from_scores(
        Method::Laplacian,
        rows.channel_ids(),
        scores,
        false,
    ))
}
