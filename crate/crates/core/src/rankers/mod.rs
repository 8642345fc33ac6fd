//! Channel rankers: Relief, mRMR and Laplacian Score.
//!
//! Every ranker maps a [`LabeledMatrix`] to a [`RankingList`] holding all of
//! its channel ids, best first. Equal scores always resolve to the lower
//! channel id.

pub mod discretize;
pub mod graph;
pub mod info;
pub mod laplacian;
pub mod mrmr;
pub mod relief;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::LabeledMatrix;
use crate::error::{Error, Result};

pub use discretize::{discretize, Discretization};
pub use graph::{knn_graph, KnnGraph};
pub use info::{entropy, mutual_information};
pub use laplacian::{laplacian_rank, LaplacianParams};
pub use mrmr::{mrmr_rank, MrmrParams};
pub use relief::{relief_rank, NeighborMode, ProbeOrder, ReliefParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Relief,
    Mrmr,
    Laplacian,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Relief, Method::Mrmr, Method::Laplacian];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Relief => "relief",
            Method::Mrmr => "mrmr",
            Method::Laplacian => "laplacian",
        }
    }

    /// Whether a larger score is better.
    pub fn higher_is_better(&self) -> bool {
        !matches!(self, Method::Laplacian)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// One ranker's output: channel ids best first, with aligned scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingList {
    pub method: Method,
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
}

impl RankingList {
    /// Sorts channels by score (descending or ascending), ties to the lower id.
    pub fn from_scores(method: Method, channel_ids: &[usize], scores: Vec<f64>, descending: bool) -> Self {
        let mut idx: Vec<usize> = (0..channel_ids.len()).collect();
        idx.sort_by(|&a, &b| {
            let by_score = if descending {
                scores[b].total_cmp(&scores[a])
            } else {
                scores[a].total_cmp(&scores[b])
            };
            by_score.then(channel_ids[a].cmp(&channel_ids[b]))
        });
        Self {
            method,
            order: idx.iter().map(|&i| channel_ids[i]).collect(),
            scores: idx.iter().map(|&i| scores[i]).collect(),
        }
    }

    /// Channels whose score passes `threshold` in the method's direction.
    /// Not used by the experiment pipeline, which sweeps prefixes instead.
    pub fn above_threshold(&self, threshold: f64) -> Vec<usize> {
        self.order
            .iter()
            .zip(&self.scores)
            .filter(|(_, &s)| {
                if self.method.higher_is_better() {
                    s >= threshold
                } else {
                    s <= threshold
                }
            })
            .map(|(&c, _)| c)
            .collect()
    }
}

/// A ranker together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum RankerConfig {
    Relief(ReliefParams),
    Mrmr(MrmrParams),
    Laplacian(LaplacianParams),
}

impl RankerConfig {
    pub fn default_for(method: Method) -> Self {
        match method {
            Method::Relief => RankerConfig::Relief(ReliefParams::default()),
            Method::Mrmr => RankerConfig::Mrmr(MrmrParams::default()),
            Method::Laplacian => RankerConfig::Laplacian(LaplacianParams::default()),
        }
    }

    pub fn method(&self) -> Method {
        match self {
            RankerConfig::Relief(_) => Method::Relief,
            RankerConfig::Mrmr(_) => Method::Mrmr,
            RankerConfig::Laplacian(_) => Method::Laplacian,
        }
    }

    pub fn rank(&self, matrix: &LabeledMatrix) -> Result<RankingList> {
        match self {
            RankerConfig::Relief(p) => relief_rank(matrix, p),
            RankerConfig::Mrmr(p) => mrmr_rank(matrix, p),
            RankerConfig::Laplacian(p) => laplacian_rank(matrix, p),
        }
    }

    pub fn params_json(&self) -> serde_json::Value {
        match self {
            RankerConfig::Relief(p) => serde_json::to_value(p),
            RankerConfig::Mrmr(p) => serde_json::to_value(p),
            RankerConfig::Laplacian(p) => serde_json::to_value(p),
        }
        .expect("ranker params serialize")
    }
}

/// On-disk ranking: `method`, `params`, `order`, `scores`. Non-finite scores
/// are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingFile {
    pub method: Method,
    pub params: serde_json::Value,
    pub order: Vec<usize>,
    pub scores: Vec<Option<f64>>,
}

impl RankingFile {
    pub fn new(config: &RankerConfig, ranking: &RankingList) -> Self {
        Self {
            method: ranking.method,
            params: config.params_json(),
            order: ranking.order.clone(),
            scores: ranking.scores.iter().map(|s| s.is_finite().then_some(*s)).collect(),
        }
    }

    /// Back to a ranking; `null` scores become `+inf`.
    pub fn ranking(&self) -> RankingList {
        RankingList {
            method: self.method,
            order: self.order.clone(),
            scores: self.scores.iter().map(|s| s.unwrap_or(f64::INFINITY)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_scores_orders_and_breaks_ties() {
        let r = RankingList::from_scores(Method::Relief, &[7, 3, 5], vec![0.5, 0.9, 0.5], true);
        assert_eq!(r.order, vec![3, 5, 7]);
        let r = RankingList::from_scores(Method::Laplacian, &[7, 3, 5], vec![f64::INFINITY, 0.2, 0.2], false);
        assert_eq!(r.order, vec![3, 5, 7]);
        assert_eq!(r.scores[2], f64::INFINITY);
    }

    #[test]
    fn threshold_filter_respects_direction() {
        let r = RankingList::from_scores(Method::Relief, &[0, 1, 2], vec![0.3, 0.1, -0.2], true);
        assert_eq!(r.above_threshold(0.05), vec![0, 1]);
        let r = RankingList::from_scores(Method::Laplacian, &[0, 1, 2], vec![0.3, 0.1, 0.9], false);
        assert_eq!(r.above_threshold(0.3), vec![1, 0]);
    }

    #[test]
    fn ranking_file_round_trip_with_infinite_score() {
        let cfg = RankerConfig::default_for(Method::Laplacian);
        let r = RankingList::from_scores(Method::Laplacian, &[0, 1], vec![0.5, f64::INFINITY], false);
        let file = RankingFile::new(&cfg, &r);
        let json = serde_json::to_string(&file).unwrap();
        assert!(json.contains("\"method\":\"laplacian\""));
        assert!(json.contains("null"));
        let back: RankingFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.ranking(), r);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("mrmr".parse::<Method>().unwrap(), Method::Mrmr);
        assert!("chi2".parse::<Method>().is_err());
    }
}
