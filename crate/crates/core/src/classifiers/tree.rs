//! CART classification tree with Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct values.
//! Growth stops at `max_depth`, at pure nodes, when no split leaves at least
//! `min_leaf` rows on both sides, or when no split lowers impurity. Equally
//! good splits prefer the lowest channel id, then the lowest threshold.

use ndarray::ArrayView1;
use rayon::prelude::*;

use super::argmax_count;
use crate::data::LabeledMatrix;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        label: i64,
    },
    Split {
        /// Column position in the training matrix.
        position: usize,
        channel: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    channel_ids: Vec<usize>,
    /// Node 0 is the root.
    nodes: Vec<TreeNode>,
}

impl TreeModel {
    pub fn channel_ids(&self) -> &[usize] {
        &self.channel_ids
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_one(&self, x: ArrayView1<'_, f64>) -> i64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { label } => return label,
                TreeNode::Split {
                    position,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[position] <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn predict_rows(&self, test: &LabeledMatrix) -> Vec<i64> {
        (0..test.rows())
            .into_par_iter()
            .map(|i| self.predict_one(test.row(i)))
            .collect()
    }
}

/// Training data with every column presorted once. Trees over any leading
/// block of columns can then be grown without re-sorting.
#[derive(Debug, Clone)]
pub struct TreeTrainer {
    channel_ids: Vec<usize>,
    columns: Vec<Vec<f64>>,
    /// Row indices per column, ascending by (value, row).
    sorted: Vec<Vec<u32>>,
    classes: Vec<i64>,
    dense: Vec<usize>,
}

struct Candidate {
    score: f64,
    position: usize,
    channel: usize,
    threshold: f64,
}

impl TreeTrainer {
    pub fn new(train: &LabeledMatrix) -> Result<Self> {
        train.require_supervised()?;
        let (classes, dense) = train.dense_labels();
        let columns: Vec<Vec<f64>> = (0..train.channels())
            .map(|c| train.features().column(c).to_vec())
            .collect();
        let sorted = columns
            .par_iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Ok(Self {
            channel_ids: train.channel_ids().to_vec(),
            columns,
            sorted,
            classes,
            dense,
        })
    }

    /// Grows a tree on the leading `n` columns.
    pub fn fit(&self, n: usize, max_depth: usize, min_leaf: usize) -> TreeModel {
        let n = n.min(self.columns.len());
        let mut nodes = Vec::new();
        let lists: Vec<Vec<u32>> = self.sorted[..n].to_vec();
        let mut side = vec![false; self.dense.len()];
        self.grow(&mut nodes, lists, 0, max_depth, min_leaf.max(1), &mut side);
        TreeModel {
            channel_ids: self.channel_ids[..n].to_vec(),
            nodes,
        }
    }

    fn counts(&self, rows: &[u32]) -> Vec<usize> {
        let mut counts = vec![0usize; self.classes.len()];
        for &r in rows {
            counts[self.dense[r as usize]] += 1;
        }
        counts
    }

    fn grow(
        &self,
        nodes: &mut Vec<TreeNode>,
        lists: Vec<Vec<u32>>,
        depth: usize,
        max_depth: usize,
        min_leaf: usize,
        side: &mut [bool],
    ) -> usize {
        let id = nodes.len();
        let counts = self.counts(&lists[0]);
        let label = self.classes[argmax_count(&counts)];
        nodes.push(TreeNode::Leaf { label });
        let total = lists[0].len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= max_depth || pure || total < 2 * min_leaf {
            return id;
        }
        let Some(best) = self.best_split(&lists, &counts, min_leaf) else {
            return id;
        };

        let col = &self.columns[best.position];
        for &r in &lists[0] {
            side[r as usize] = col[r as usize] <= best.threshold;
        }
        let mut left_lists = Vec::with_capacity(lists.len());
        let mut right_lists = Vec::with_capacity(lists.len());
        for list in lists {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&r| side[r as usize]);
            left_lists.push(l);
            right_lists.push(r);
        }
        let left = self.grow(nodes, left_lists, depth + 1, max_depth, min_leaf, side);
        let right = self.grow(nodes, right_lists, depth + 1, max_depth, min_leaf, side);
        nodes[id] = TreeNode::Split {
            position: best.position,
            channel: best.channel,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Maximizes `Σ_k cL_k²/nL + Σ_k cR_k²/nR`, which is equivalent to
    /// minimizing the size-weighted Gini impurity of the children.
    fn best_split(&self, lists: &[Vec<u32>], counts: &[usize], min_leaf: usize) -> Option<Candidate> {
        let total = lists[0].len();
        let parent_sq: u64 = counts.iter().map(|&c| (c * c) as u64).sum();
        let parent = parent_sq as f64 / total as f64;
        let mut best: Option<Candidate> = None;
        for (position, list) in lists.iter().enumerate() {
            let col = &self.columns[position];
            let channel = self.channel_ids[position];
            let mut left = vec![0u64; counts.len()];
            let mut right: Vec<u64> = counts.iter().map(|&c| c as u64).collect();
            let mut left_sq = 0u64;
            let mut right_sq = parent_sq;
            for i in 0..total - 1 {
                let y = self.dense[list[i] as usize];
                left_sq += 2 * left[y] + 1;
                left[y] += 1;
                right_sq -= 2 * right[y] - 1;
                right[y] -= 1;
                let n_left = i + 1;
                if n_left < min_leaf || total - n_left < min_leaf {
                    continue;
                }
                let a = col[list[i] as usize];
                let b = col[list[i + 1] as usize];
                if a == b {
                    continue;
                }
                let score = left_sq as f64 / n_left as f64 + right_sq as f64 / (total - n_left) as f64;
                let better = match &best {
                    None => true,
                    Some(c) => score > c.score || (score == c.score && channel < c.channel),
                };
                if better {
                    best = Some(Candidate {
                        score,
                        position,
                        channel,
                        threshold: midpoint(a, b),
                    });
                }
            }
        }
        best.filter(|c| c.score > parent * (1.0 + 1e-12))
    }
}

/// Midpoint of `a < b` that still separates them after rounding.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b || m < a {
        a
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn fit_default(m: &LabeledMatrix, depth: usize, leaf: usize) -> TreeModel {
        TreeTrainer::new(m).unwrap().fit(m.channels(), depth, leaf)
    }

    #[test]
    fn separable_one_dimensional_gives_single_split() {
        let f = Array2::from_shape_fn((20, 1), |(r, _)| r as f64);
        let labels = (0..20).map(|r| if r < 10 { 1 } else { 2 }).collect();
        let m = LabeledMatrix::new(f, labels, vec![0]).unwrap();
        let t = fit_default(&m, 10, 5);
        assert_eq!(t.depth(), 1);
        match t.nodes()[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(threshold, 9.5),
            _ => panic!("root should split"),
        }
        assert_eq!(t.predict_rows(&m), m.labels());
    }

    #[test]
    fn pure_child_stops_growing() {
        let f = array![[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]];
        let m = LabeledMatrix::new(f, vec![1, 1, 1, 2, 2, 1], vec![0]).unwrap();
        let t = fit_default(&m, 10, 1);
        // root splits at 2.5; the pure left child is a leaf
        match t.nodes()[0] {
            TreeNode::Split { threshold, left, .. } => {
                assert_eq!(threshold, 2.5);
                assert_eq!(t.nodes()[left], TreeNode::Leaf { label: 1 });
            }
            _ => panic!("root should split"),
        }
        assert_eq!(t.predict_rows(&m), m.labels());
    }

    #[test]
    fn tie_prefers_lowest_channel_id() {
        // both columns separate the classes perfectly; channel id 2 < 7
        let f = array![[0.0, 10.0], [1.0, 11.0], [5.0, 20.0], [6.0, 21.0]];
        let m = LabeledMatrix::new(f, vec![1, 1, 2, 2], vec![7, 2]).unwrap();
        let t = fit_default(&m, 3, 1);
        match t.nodes()[0] {
            TreeNode::Split { channel, position, threshold, .. } => {
                assert_eq!((channel, position), (2, 1));
                assert_eq!(threshold, 15.5);
            }
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn min_leaf_blocks_small_children() {
        let f = array![[0.0], [1.0], [2.0], [3.0]];
        let m = LabeledMatrix::new(f, vec![1, 2, 2, 2], vec![0]).unwrap();
        assert_eq!(fit_default(&m, 10, 3).depth(), 0);
        assert_eq!(fit_default(&m, 10, 1).depth(), 1);
    }

    #[test]
    fn prefix_fit_matches_projected_fit() {
        let mut rng = crate::rng::seeded(4);
        use rand::Rng;
        let f = Array2::from_shape_fn((60, 4), |_| rng.gen::<f64>());
        let labels = (0..60).map(|r| (r % 3) as i64).collect();
        let full = LabeledMatrix::new(f, labels, vec![3, 1, 0, 2]).unwrap();
        let trainer = TreeTrainer::new(&full).unwrap();
        for n in 1..=4 {
            let p = crate::data::project_channels(&full, &full.channel_ids()[..n].to_vec()).unwrap();
            assert_eq!(trainer.fit(n, 6, 2), fit_default(&p, 6, 2));
        }
    }

    #[test]
    fn midpoint_of_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(a, b);
        assert!(a <= m && m < b);
    }
}
