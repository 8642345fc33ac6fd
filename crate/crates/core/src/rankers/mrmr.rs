//! Minimum-redundancy maximum-relevance ranking (difference form).
//!
//! Greedy: the first pick maximizes `I(f; class)`; every later pick maximizes
//! `I(f; class) - mean_{s in S} I(f; s)` over the channels not yet chosen.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discretize::{discretize, Discretization};
use super::info::mutual_information;
use super::{Method, RankingList};
use crate::data::LabeledMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MrmrParams {
    pub discretization: Discretization,
}

/// Columns with at most two distinct values are already discrete and are used
/// as categories; μ±σ binning would collapse a balanced two-valued column
/// into a single level.
pub(crate) fn encode_column(column: &[f64], scheme: Discretization) -> Vec<usize> {
    let first = column[0];
    match column.iter().find(|&&v| v != first) {
        Some(&second) if column.iter().all(|&v| v == first || v == second) => {
            let low = first.min(second);
            column.iter().map(|&v| usize::from(v != low)).collect()
        }
        _ => discretize(column, scheme),
    }
}

pub fn mrmr_rank(matrix: &LabeledMatrix, params: &MrmrParams) -> Result<RankingList> {
    matrix.require_supervised()?;
    params.discretization.validate()?;
    if matrix.rows() < 2 {
        return Err(Error::InvalidParameter("mRMR needs at least 2 rows".into()));
    }
    let ids = matrix.channel_ids();
    let channels = matrix.channels();
    let levels: Vec<Vec<usize>> = (0..channels)
        .into_par_iter()
        .map(|c| {
            let col: Vec<f64> = matrix.features().column(c).to_vec();
            encode_column(&col, params.discretization)
        })
        .collect();
    let (_, class) = matrix.dense_labels();

    let relevance: Vec<f64> = levels
        .par_iter()
        .map(|l| mutual_information(l, &class))
        .collect::<Result<_>>()?;

    let mut redundancy = vec![0.0f64; channels];
    let mut remaining: Vec<usize> = (0..channels).collect();
    let mut order = Vec::with_capacity(channels);
    let mut scores = Vec::with_capacity(channels);

    while !remaining.is_empty() {
        let selected = order.len() as f64;
        let objective = |c: usize| {
            if order.is_empty() {
                relevance[c]
            } else {
                relevance[c] - redundancy[c] / selected
            }
        };
        let (slot, best) = remaining
            .iter()
            .enumerate()
            .map(|(slot, &c)| (slot, c))
            .reduce(|a, b| {
                let (oa, ob) = (objective(a.1), objective(b.1));
                if ob > oa || (ob == oa && ids[b.1] < ids[a.1]) {
                    b
                } else {
                    a
                }
            })
            .unwrap();
        scores.push(objective(best));
        order.push(best);
        remaining.remove(slot);

        let added: Vec<f64> = remaining
            .par_iter()
            .map(|&c| mutual_information(&levels[c], &levels[best]))
            .collect::<Result<_>>()?;
        for (&c, mi) in remaining.iter().zip(added) {
            redundancy[c] += mi;
        }
    }

    Ok(RankingList {
        method: Method::Mrmr,
        order: order.into_iter().map(|c| ids[c]).collect(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankers::info::entropy;
    use ndarray::Array2;
    use rand::Rng;

    #[test]
    fn label_copy_first() {
        let mut rng = crate::rng::seeded(4);
        let labels: Vec<i64> = (0..120).map(|i| (i % 2) as i64 + 1).collect();
        let f = Array2::from_shape_fn((120, 2), |(r, c)| {
            if c == 0 {
                labels[r] as f64
            } else {
                rng.gen::<f64>()
            }
        });
        let m = LabeledMatrix::new(f, labels, vec![0, 1]).unwrap();
        let r = mrmr_rank(&m, &MrmrParams::default()).unwrap();
        assert_eq!(r.order, vec![0, 1]);
        // the label copy is two-valued, so it is used categorically: relevance = H(class)
        assert_eq!(r.scores[0], 1.0);
        assert!(r.scores[1] < 1.0);
    }

    /// Binary construction: ch0 agrees with the class on 14/16 rows, ch1 is an
    /// exact copy of ch0, ch2 agrees on 12/16 rows with errors on other rows.
    #[test]
    fn duplicate_pushed_behind_weaker_independent_channel() {
        let class: Vec<i64> = (0..16).map(|i| if i < 8 { 1 } else { 2 }).collect();
        let flip = |r: usize, rows: &[usize]| {
            let v = if class[r] == 1 { -1.0 } else { 1.0 };
            if rows.contains(&r) { -v } else { v }
        };
        let f = Array2::from_shape_fn((16, 3), |(r, c)| match c {
            0 | 1 => flip(r, &[0, 8]),
            _ => flip(r, &[1, 2, 9, 10]),
        });
        let m = LabeledMatrix::new(f, class.clone(), vec![0, 1, 2]).unwrap();
        let r = mrmr_rank(&m, &MrmrParams::default()).unwrap();

        // counted-MI oracle for the greedy objective
        let cols: Vec<Vec<usize>> = (0..3)
            .map(|c| m.features().column(c).iter().map(|&v| (v > 0.0) as usize).collect())
            .collect();
        let y: Vec<usize> = class.iter().map(|&l| l as usize).collect();
        let rel: Vec<f64> = cols.iter().map(|c| mutual_information(c, &y).unwrap()).collect();
        assert!(rel[0] > rel[2] && rel[2] > 0.0);
        assert_eq!(mutual_information(&cols[1], &cols[0]).unwrap(), entropy(&cols[0]));
        let obj1 = rel[1] - mutual_information(&cols[1], &cols[0]).unwrap();
        let obj2 = rel[2] - mutual_information(&cols[2], &cols[0]).unwrap();
        assert!(obj2 > obj1, "oracle: {obj2} vs {obj1}");

        assert_eq!(r.order, vec![0, 2, 1]);
        assert_eq!(r.scores[0], rel[0]);
        assert_eq!(r.scores[1], obj2);
    }

    #[test]
    fn two_valued_columns_are_categorical() {
        assert_eq!(encode_column(&[3.0, -1.0, 3.0, -1.0], Discretization::MeanStd), vec![1, 0, 1, 0]);
        assert_eq!(encode_column(&[2.0; 4], Discretization::MeanStd), vec![1; 4]);
        assert_eq!(encode_column(&[-10.0, 0.0, 10.0], Discretization::MeanStd), vec![1, 1, 1]);
    }

    #[test]
    fn single_channel() {
        let f = ndarray::array![[0.0], [1.0], [2.0]];
        let m = LabeledMatrix::new(f, vec![1, 2, 2], vec![4]).unwrap();
        assert_eq!(mrmr_rank(&m, &MrmrParams::default()).unwrap().order, vec![4]);
    }

    #[test]
    fn equal_objectives_resolve_by_channel_id() {
        let f = ndarray::array![[0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [1.0, 1.0]];
        let m = LabeledMatrix::new(f, vec![1, 2, 1, 2], vec![9, 2]).unwrap();
        assert_eq!(mrmr_rank(&m, &MrmrParams::default()).unwrap().order, vec![2, 9]);
    }
}
