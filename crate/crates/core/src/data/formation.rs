//! Building labeled matrices from a trial tensor, plus row/column selection.

use std::collections::HashSet;

use ndarray::{concatenate, Axis};
use rand::seq::{index, SliceRandom};

use super::{LabeledMatrix, TrialTensor};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Row-concatenates trial `trial_index` of every class (ascending label).
pub fn form_horizontal(tensor: &TrialTensor, trial_index: usize) -> Result<LabeledMatrix> {
    tensor.trials_per_class()?;
    let groups = tensor.trials_by_class();
    let mut blocks = Vec::with_capacity(groups.len());
    let mut labels = Vec::with_capacity(tensor.samples_per_trial() * groups.len());
    for (&class, trials) in &groups {
        let trial = trials
            .iter()
            .find(|t| t.trial_index == trial_index)
            .ok_or_else(|| {
                Error::InvalidDataset(format!("class {class} has no trial with index {trial_index}"))
            })?;
        blocks.push(trial.data.view());
        labels.extend(std::iter::repeat_n(class, trial.data.nrows()));
    }
    let features = concatenate(Axis(0), &blocks)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    LabeledMatrix::new(features, labels, (0..tensor.channel_count()).collect())
}

/// Stacks every trial: class blocks in ascending label order, trials in index order.
pub fn form_vertical(tensor: &TrialTensor) -> Result<LabeledMatrix> {
    let groups = tensor.trials_by_class();
    let mut blocks = Vec::with_capacity(tensor.trials().len());
    let mut labels = Vec::new();
    for (&class, trials) in &groups {
        for trial in trials {
            blocks.push(trial.data.view());
            labels.extend(std::iter::repeat_n(class, trial.data.nrows()));
        }
    }
    if blocks.is_empty() {
        return Err(Error::InvalidDataset("tensor has no trials".into()));
    }
    let features = concatenate(Axis(0), &blocks)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    LabeledMatrix::new(features, labels, (0..tensor.channel_count()).collect())
}

/// Number of rows a class of size `n` contributes to the training side.
pub(crate) fn train_count(fraction: f64, n: usize) -> usize {
    // guard against 0.7 * 1000 = 700.0000000000001 style products
    let raw = fraction * n as f64;
    (raw - 1e-9).ceil().max(0.0) as usize
}

/// Stratified seeded split. Each class is shuffled independently (ascending
/// label order, one shared generator); the first `ceil(fraction * n)` rows go
/// to train. Both halves keep original row order.
pub fn split(
    matrix: &LabeledMatrix,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledMatrix, LabeledMatrix)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = seeded(seed);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for (label, mut rows) in matrix.rows_by_class() {
        let n = rows.len();
        let n_train = train_count(train_fraction, n);
        if n_train == 0 || n_train >= n {
            return Err(Error::DegenerateSplit {
                label,
                reason: format!("{n} rows at fraction {train_fraction} leave an empty partition"),
            });
        }
        rows.shuffle(&mut rng);
        train_rows.extend_from_slice(&rows[..n_train]);
        test_rows.extend_from_slice(&rows[n_train..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok((matrix.select_rows(&train_rows)?, matrix.select_rows(&test_rows)?))
}

/// Columns reordered/subset to `channels`; cell values are copied untouched.
pub fn project_channels(matrix: &LabeledMatrix, channels: &[usize]) -> Result<LabeledMatrix> {
    if channels.is_empty() {
        return Err(Error::InvalidParameter("projection onto an empty channel list".into()));
    }
    let mut seen = HashSet::with_capacity(channels.len());
    let mut positions = Vec::with_capacity(channels.len());
    for &c in channels {
        if !seen.insert(c) {
            return Err(Error::DuplicateChannel(c));
        }
        positions.push(matrix.position_of(c).ok_or(Error::UnknownChannel(c))?);
    }
    let features = matrix.features().select(Axis(1), &positions);
    LabeledMatrix::new(features, matrix.labels().to_vec(), channels.to_vec())
}

/// Uniform seeded subsample of at most `cap` rows (original order kept).
pub fn subsample_rows(matrix: &LabeledMatrix, cap: usize, seed: u64) -> Result<LabeledMatrix> {
    if matrix.rows() <= cap {
        return Ok(matrix.clone());
    }
    let mut rng = seeded(seed);
    let mut rows = index::sample(&mut rng, matrix.rows(), cap).into_vec();
    rows.sort_unstable();
    matrix.select_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Trial;
    use ndarray::Array2;
    use std::collections::BTreeSet;

    /// Cell value encodes (class, trial, sample, channel) so rows are traceable.
    fn tensor(samples: usize, channels: usize, trials: usize, classes: usize) -> TrialTensor {
        let mut all = Vec::new();
        for c in 1..=classes as i64 {
            for t in 0..trials {
                let data = Array2::from_shape_fn((samples, channels), |(s, ch)| {
                    (c * 1_000_000 + t as i64 * 10_000 + s as i64 * 100 + ch as i64) as f64
                });
                all.push(Trial::new(c, t, data));
            }
        }
        let labels: BTreeSet<i64> = (1..=classes as i64).collect();
        TrialTensor::new(all, channels, samples, labels).unwrap()
    }

    fn matrix(labels: Vec<i64>, channels: usize) -> LabeledMatrix {
        let rows = labels.len();
        let f = Array2::from_shape_fn((rows, channels), |(r, c)| (r * 10 + c) as f64);
        LabeledMatrix::new(f, labels, (0..channels).collect()).unwrap()
    }

    #[test]
    fn horizontal_pairs_trial_i_of_each_class() {
        let t = tensor(500, 16, 5, 2);
        let m = form_horizontal(&t, 2).unwrap();
        assert_eq!(m.features().dim(), (1000, 16));
        assert!(m.labels()[..500].iter().all(|&l| l == 1));
        assert!(m.labels()[500..].iter().all(|&l| l == 2));
        assert_eq!(m.features()[[0, 3]], 1_020_003.0);
        assert_eq!(m.features()[[999, 15]], 2_069_915.0);
        assert_eq!(m.channel_ids(), (0..16).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn horizontal_minimal_and_three_class() {
        let m = form_horizontal(&tensor(1, 4, 1, 2), 0).unwrap();
        assert_eq!(m.features().dim(), (2, 4));
        assert_eq!(m.labels(), &[1, 2]);

        let m = form_horizontal(&tensor(100, 3, 2, 3), 1).unwrap();
        assert_eq!(m.rows(), 300);
        for (block, label) in [1i64, 2, 3].iter().enumerate() {
            let count = m.labels()[block * 100..(block + 1) * 100]
                .iter()
                .filter(|&&l| l == *label)
                .count();
            assert_eq!(count, 100);
        }
    }

    #[test]
    fn horizontal_missing_trial_index() {
        let t = tensor(2, 2, 3, 2);
        assert!(form_horizontal(&t, 3).is_err());
    }

    #[test]
    fn vertical_stacks_class_then_trial() {
        let t = tensor(500, 16, 5, 2);
        let m = form_vertical(&t).unwrap();
        assert_eq!(m.features().dim(), (5000, 16));
        // third trial block of class 1
        assert_eq!(m.features()[[1000, 0]], 1_020_000.0);
        assert_eq!(m.labels()[2499], 1);
        assert_eq!(m.labels()[2500], 2);
    }

    #[test]
    fn vertical_equals_horizontal_for_single_trial() {
        let t = tensor(7, 3, 1, 2);
        assert_eq!(form_vertical(&t).unwrap(), form_horizontal(&t, 0).unwrap());
    }

    #[test]
    fn split_seventy_thirty() {
        let mut labels = vec![1; 500];
        labels.extend(vec![2; 500]);
        let m = matrix(labels, 3);
        let (train, test) = split(&m, 0.7, 11).unwrap();
        assert_eq!((train.rows(), test.rows()), (700, 300));
        assert_eq!(train.labels().iter().filter(|&&l| l == 1).count(), 350);
        assert_eq!(test.labels().iter().filter(|&&l| l == 2).count(), 150);

        let (train2, test2) = split(&m, 0.7, 11).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
    }

    #[test]
    fn split_minimal_and_degenerate() {
        let m = matrix(vec![1, 1, 2, 2], 2);
        let (train, test) = split(&m, 0.5, 0).unwrap();
        assert_eq!(train.labels(), &[1, 2]);
        assert_eq!(test.labels(), &[1, 2]);

        let m = matrix(vec![1, 2, 2], 2);
        assert!(matches!(split(&m, 0.5, 0), Err(Error::DegenerateSplit { label: 1, .. })));
        assert!(split(&matrix(vec![1, 1, 2, 2], 2), 1.0, 0).is_err());
    }

    #[test]
    fn train_count_is_robust_to_rounding() {
        assert_eq!(train_count(0.7, 1000), 700);
        assert_eq!(train_count(0.7, 500), 350);
        assert_eq!(train_count(0.7, 10), 7);
        assert_eq!(train_count(0.7, 3), 3);
        assert_eq!(train_count(0.3, 10), 3);
    }

    #[test]
    fn projection_cases() {
        let m = matrix(vec![1, 2, 1], 16);
        assert_eq!(project_channels(&m, &(0..16).collect::<Vec<_>>()).unwrap(), m);

        let p = project_channels(&m, &[5]).unwrap();
        assert_eq!(p.channel_ids(), &[5]);
        assert_eq!(p.features()[[2, 0]], 25.0);

        let direct = project_channels(&m, &[1]).unwrap();
        let composed = project_channels(&project_channels(&m, &[3, 1]).unwrap(), &[1]).unwrap();
        assert_eq!(direct, composed);

        assert!(matches!(project_channels(&m, &[16]), Err(Error::UnknownChannel(16))));
        assert!(matches!(project_channels(&m, &[2, 2]), Err(Error::DuplicateChannel(2))));
        assert!(project_channels(&m, &[]).is_err());
    }

    #[test]
    fn subsample_keeps_order_and_cap() {
        let m = matrix((0..50).map(|i| (i % 2) as i64).collect(), 2);
        let s = subsample_rows(&m, 20, 3).unwrap();
        assert_eq!(s.rows(), 20);
        let firsts: Vec<f64> = s.features().column(0).to_vec();
        assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(subsample_rows(&m, 100, 3).unwrap(), m);
    }
}
