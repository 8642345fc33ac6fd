//! Fusion of per-trial rankings for the horizontal setting.
//!
//! Rankings of every paired trial form the columns of a rank matrix `R`
//! (positions × trials). Each row is reduced to its most frequent channel,
//! giving a positional vector `F` that may repeat channels; the first
//! occurrence of each channel in `F` yields the final ranking.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{form_horizontal, TrialTensor};
use crate::error::{Error, Result};
use crate::rankers::{RankerConfig, RankingList};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    /// One ranking per trial, in `trial_ids` order.
    pub columns: Vec<Vec<usize>>,
    pub trial_ids: Vec<usize>,
}

impl RankMatrix {
    pub fn new(columns: Vec<Vec<usize>>, trial_ids: Vec<usize>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidParameter("rank matrix has no columns".into()));
        }
        if columns.len() != trial_ids.len() {
            return Err(Error::LengthMismatch {
                left: columns.len(),
                right: trial_ids.len(),
            });
        }
        let mut reference: Vec<usize> = columns[0].clone();
        reference.sort_unstable();
        for col in &columns {
            let mut sorted = col.clone();
            sorted.sort_unstable();
            if sorted != reference {
                return Err(Error::InvalidParameter(
                    "rank matrix columns are not permutations of the same channel set".into(),
                ));
            }
        }
        if reference.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("rank matrix column repeats a channel".into()));
        }
        Ok(Self { columns, trial_ids })
    }

    pub fn positions(&self) -> usize {
        self.columns[0].len()
    }

    pub fn row(&self, p: usize) -> Vec<usize> {
        self.columns.iter().map(|c| c[p]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedRanking {
    pub positional: Vec<usize>,
    #[serde(rename = "final")]
    pub final_ranking: Vec<usize>,
}

/// Ranks every paired trial. Column order follows trial index regardless of
/// which trial finishes first.
pub fn collect_rank_matrix_with<F>(tensor: &TrialTensor, rank: F) -> Result<(RankMatrix, Vec<RankingList>)>
where
    F: Fn(&crate::data::LabeledMatrix) -> Result<RankingList> + Sync,
{
    let trial_ids = tensor.paired_trial_indices()?;
    let rankings: Vec<RankingList> = trial_ids
        .par_iter()
        .map(|&t| {
            form_horizontal(tensor, t)
                .and_then(|m| rank(&m))
                .map_err(|e| e.in_trial(t))
        })
        .collect::<Result<_>>()?;
    let columns = rankings.iter().map(|r| r.order.clone()).collect();
    Ok((RankMatrix::new(columns, trial_ids)?, rankings))
}

pub fn collect_rank_matrix(tensor: &TrialTensor, ranker: &RankerConfig) -> Result<RankMatrix> {
    collect_rank_matrix_with(tensor, |m| ranker.rank(m)).map(|(r, _)| r)
}

/// Most frequent channel per row; equal frequencies go to the lowest id.
pub fn positional_mode(matrix: &RankMatrix) -> Vec<usize> {
    (0..matrix.positions())
        .map(|p| {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for col in &matrix.columns {
                *counts.entry(col[p]).or_default() += 1;
            }
            // BTreeMap iterates ascending, so the first maximum is the lowest id
            let mut best = (0usize, 0usize);
            for (&channel, &count) in &counts {
                if count > best.1 {
                    best = (channel, count);
                }
            }
            best.0
        })
        .collect()
}

/// Distinct values in order of first occurrence.
pub fn dedupe_preserve_order(values: &[usize]) -> Vec<usize> {
    let mut seen = HashSet::with_capacity(values.len());
    values.iter().copied().filter(|v| seen.insert(*v)).collect()
}

pub fn aggregate(matrix: &RankMatrix) -> AggregatedRanking {
    let positional = positional_mode(matrix);
    let final_ranking = dedupe_preserve_order(&positional);
    AggregatedRanking {
        positional,
        final_ranking,
    }
}

/// On-disk aggregation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationFile {
    pub method: crate::rankers::Method,
    pub params: serde_json::Value,
    pub rank_matrix: Vec<Vec<usize>>,
    pub trial_ids: Vec<usize>,
    pub positional: Vec<usize>,
    #[serde(rename = "final")]
    pub final_ranking: Vec<usize>,
}

impl AggregationFile {
    pub fn new(config: &RankerConfig, matrix: &RankMatrix, agg: &AggregatedRanking) -> Self {
        Self {
            method: config.method(),
            params: config.params_json(),
            rank_matrix: matrix.columns.clone(),
            trial_ids: matrix.trial_ids.clone(),
            positional: agg.positional.clone(),
            final_ranking: agg.final_ranking.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[usize]]) -> RankMatrix {
        let trials = rows[0].len();
        let columns = (0..trials).map(|t| rows.iter().map(|r| r[t]).collect()).collect();
        RankMatrix {
            columns,
            trial_ids: (0..trials).collect(),
        }
    }

    #[test]
    fn mode_per_row() {
        let r = from_rows(&[&[2, 2, 5], &[1, 3, 1], &[3, 1, 3]]);
        assert_eq!(positional_mode(&r), vec![2, 1, 3]);
    }

    #[test]
    fn mode_tie_goes_to_lower_id() {
        let r = from_rows(&[&[4, 7, 7, 4]]);
        assert_eq!(positional_mode(&r), vec![4]);
    }

    #[test]
    fn single_column_mode_is_the_column() {
        let r = RankMatrix::new(vec![vec![3, 0, 2, 1]], vec![0]).unwrap();
        assert_eq!(positional_mode(&r), vec![3, 0, 2, 1]);
    }

    #[test]
    fn dedupe_cases() {
        assert_eq!(dedupe_preserve_order(&[5, 5, 2, 5, 2, 9]), vec![5, 2, 9]);
        assert_eq!(dedupe_preserve_order(&[4, 1, 3]), vec![4, 1, 3]);
        assert_eq!(dedupe_preserve_order(&[3, 3, 3]), vec![3]);
    }

    #[test]
    fn identical_columns_fixed_point() {
        let col = vec![6, 2, 0, 5, 1, 3, 4];
        let r = RankMatrix::new(vec![col.clone(); 4], vec![0, 1, 2, 3]).unwrap();
        let agg = aggregate(&r);
        assert_eq!(agg.positional, col);
        assert_eq!(agg.final_ranking, col);
    }

    #[test]
    fn rank_matrix_rejects_non_permutations() {
        assert!(RankMatrix::new(vec![vec![0, 1], vec![0, 2]], vec![0, 1]).is_err());
        assert!(RankMatrix::new(vec![vec![0, 0]], vec![0]).is_err());
        assert!(RankMatrix::new(vec![], vec![]).is_err());
    }

    #[test]
    fn aggregation_json_field_names() {
        let r = RankMatrix::new(vec![vec![1, 0]], vec![0]).unwrap();
        let file = AggregationFile::new(&RankerConfig::default_for(crate::rankers::Method::Mrmr), &r, &aggregate(&r));
        let v = serde_json::to_value(&file).unwrap();
        for key in ["rank_matrix", "positional", "final", "method", "params"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
