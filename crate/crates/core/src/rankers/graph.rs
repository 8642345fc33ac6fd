use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Symmetrized k-nearest-neighbour graph over the rows of a matrix.
///
/// `(i, j)` is an edge iff `j` is among the `k` nearest rows of `i` or vice
/// versa. Distances are Euclidean with the row itself excluded; equal
/// distances prefer the lower row index.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    /// Per node: `(neighbour, squared distance)` sorted by neighbour index.
    adjacency: Vec<Vec<(usize, f64)>>,
}

pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn knn_graph(rows: &Array2<f64>, k: usize) -> Result<KnnGraph> {
    let n = rows.nrows();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if n < k + 1 {
        return Err(Error::InvalidParameter(format!(
            "kNN graph with k={k} needs at least {} rows, got {n}",
            k + 1
        )));
    }
    let nearest: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = rows.row(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(xi, rows.row(j)), j))
                .collect();
            let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by_dist);
                cand.truncate(k);
            }
            cand.sort_by(by_dist);
            cand.into_iter().map(|(d, j)| (j, d)).collect()
        })
        .collect();

    let mut edges = BTreeSet::new();
    for (i, list) in nearest.iter().enumerate() {
        for &(j, d) in list {
            edges.insert((i.min(j), i.max(j), d.to_bits()));
        }
    }
    let mut adjacency = vec![Vec::new(); n];
    for (i, j, bits) in edges {
        let d = f64::from_bits(bits);
        adjacency[i].push((j, d));
        adjacency[j].push((i, d));
    }
    for list in &mut adjacency {
        list.sort_by_key(|&(j, _)| j);
        list.dedup_by_key(|&mut (j, _)| j);
    }
    Ok(KnnGraph { adjacency })
}

impl KnnGraph {
    pub fn nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search_by_key(&j, |&(n, _)| n).is_ok()
    }

    /// Undirected edges `(i, j, squared distance)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, d)| (i, j, d))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }
}
