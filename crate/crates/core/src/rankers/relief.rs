//! Relief feature weighting.
//!
//! Each probe row pulls the weight of a channel down by its squared
//! range-normalized difference to the near-hit (same class) and up by the
//! difference to the near-miss (any other class). Neighbours are searched in
//! the range-normalized space, so a positive affine rescaling of one channel
//! does not change the outcome.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Method, RankingList};
use crate::data::LabeledMatrix;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NeighborMode {
    #[default]
    Nearest,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOrder {
    /// Rows in matrix order, cycled when `iterations` exceeds the row count.
    #[default]
    Sequential,
    /// A seeded permutation of the rows, cycled.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReliefParams {
    /// Number of probes; `None` uses every row once.
    pub iterations: Option<usize>,
    pub neighbor_mode: NeighborMode,
    pub probe_order: ProbeOrder,
    pub seed: u64,
}

impl Default for ReliefParams {
    fn default() -> Self {
        Self {
            iterations: None,
            neighbor_mode: NeighborMode::Nearest,
            probe_order: ProbeOrder::Sequential,
            seed: 0,
        }
    }
}

/// Column-wise `(x - min) / range`; zero-range columns become all zeros.
fn range_normalize(features: &Array2<f64>) -> Array2<f64> {
    let mut out = features.clone();
    for mut col in out.columns_mut() {
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let range = hi - lo;
        if range > 0.0 {
            col.mapv_inplace(|x| (x - lo) / range);
        } else {
            col.fill(0.0);
        }
    }
    out
}

fn nearest_hit_miss(norm: &Array2<f64>, labels: &[i64], probe: usize) -> (Option<usize>, Option<usize>) {
    let x = norm.row(probe);
    let mut hit: Option<(f64, usize)> = None;
    let mut miss: Option<(f64, usize)> = None;
    for (j, row) in norm.outer_iter().enumerate() {
        if j == probe {
            continue;
        }
        let d: f64 = x.iter().zip(row.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        let slot = if labels[j] == labels[probe] { &mut hit } else { &mut miss };
        if slot.is_none_or(|(best, _)| d < best) {
            *slot = Some((d, j));
        }
    }
    (hit.map(|h| h.1), miss.map(|m| m.1))
}

pub fn relief_rank(matrix: &LabeledMatrix, params: &ReliefParams) -> Result<RankingList> {
    matrix.require_supervised()?;
    let n = matrix.rows();
    let iterations = params.iterations.unwrap_or(n);
    if iterations == 0 {
        return Err(Error::InvalidParameter("relief iterations must be >= 1".into()));
    }
    let norm = range_normalize(matrix.features());
    let labels = matrix.labels();

    let mut row_order: Vec<usize> = (0..n).collect();
    if params.probe_order == ProbeOrder::Random {
        row_order.shuffle(&mut seeded(params.seed));
    }
    let probes: Vec<usize> = (0..iterations).map(|i| row_order[i % n]).collect();

    let pairs: Vec<(Option<usize>, Option<usize>)> = match params.neighbor_mode {
        NeighborMode::Nearest => probes
            .par_iter()
            .map(|&p| nearest_hit_miss(&norm, labels, p))
            .collect(),
        NeighborMode::Random => {
            let by_class = matrix.rows_by_class();
            let mut rng = seeded(derive_seed(params.seed, 1));
            probes
                .iter()
                .map(|&p| {
                    let same: Vec<usize> = by_class[&labels[p]].iter().copied().filter(|&j| j != p).collect();
                    let other: Vec<usize> = (0..n).filter(|&j| labels[j] != labels[p]).collect();
                    let hit = (!same.is_empty()).then(|| same[rng.gen_range(0..same.len())]);
                    let miss = (!other.is_empty()).then(|| other[rng.gen_range(0..other.len())]);
                    (hit, miss)
                })
                .collect()
        }
    };

    let channels = matrix.channels();
    let mut weights = vec![0.0f64; channels];
    let m = iterations as f64;
    let mut skipped = 0usize;
    for (&p, pair) in probes.iter().zip(&pairs) {
        let (Some(hit), Some(miss)) = *pair else {
            skipped += 1;
            continue;
        };
        let (x, h, s) = (norm.row(p), norm.row(hit), norm.row(miss));
        for f in 0..channels {
            let dh = x[f] - h[f];
            let dm = x[f] - s[f];
            weights[f] = weights[f] - dh * dh / m + dm * dm / m;
        }
    }
    if skipped == iterations {
        return Err(Error::AllProbesSkipped);
    }
    if skipped > 0 {
        log::warn!("relief: skipped {skipped} of {iterations} probes without a near-hit");
    }
    Ok(RankingList::from_scores(
        Method::Relief,
        matrix.channel_ids(),
        weights,
        true,
    ))
}
