//! Trial-structured datasets and the flat labeled matrices derived from them.
//!
//! A [`TrialTensor`] holds every recorded trial (samples × channels) tagged
//! with its class. Rankers and classifiers never see trials directly; they
//! consume a [`LabeledMatrix`] built by one of the formation procedures in
//! [`formation`].

pub mod formation;
pub mod io;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

pub use formation::{form_horizontal, form_vertical, project_channels, split, subsample_rows};
pub use io::{load_dataset, write_dataset, Manifest};
pub use synth::{generate_synthetic, SynthSpec};

/// One contiguous recording under a single class condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub class_label: i64,
    pub trial_index: usize,
    /// samples × channels
    pub data: Array2<f64>,
}

impl Trial {
    pub fn new(class_label: i64, trial_index: usize, data: Array2<f64>) -> Self {
        Self {
            class_label,
            trial_index,
            data,
        }
    }
}

/// The full dataset: every trial of every class.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTensor {
    trials: Vec<Trial>,
    channel_count: usize,
    samples_per_trial: usize,
    class_labels: BTreeSet<i64>,
}

impl TrialTensor {
    /// Validates shapes, finiteness and label membership.
    ///
    /// Equal trial counts per class are only required for horizontal pairing
    /// and are checked there, not here.
    pub fn new(
        trials: Vec<Trial>,
        channel_count: usize,
        samples_per_trial: usize,
        class_labels: BTreeSet<i64>,
    ) -> Result<Self> {
        if channel_count == 0 || samples_per_trial == 0 {
            return Err(Error::InvalidDataset(
                "channel_count and samples_per_trial must be positive".into(),
            ));
        }
        if class_labels.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "at least 2 classes required, got {}",
                class_labels.len()
            )));
        }
        if trials.is_empty() {
            return Err(Error::InvalidDataset("tensor has no trials".into()));
        }
        let mut seen = HashSet::new();
        for trial in &trials {
            if !class_labels.contains(&trial.class_label) {
                return Err(Error::UnknownClass {
                    label: trial.class_label,
                    declared: class_labels.len(),
                });
            }
            let (rows, cols) = trial.data.dim();
            if rows != samples_per_trial || cols != channel_count {
                return Err(Error::DimensionMismatch(format!(
                    "trial {} of class {} is {}x{}, expected {}x{}",
                    trial.trial_index,
                    trial.class_label,
                    rows,
                    cols,
                    samples_per_trial,
                    channel_count
                )));
            }
            if !seen.insert((trial.class_label, trial.trial_index)) {
                return Err(Error::InvalidDataset(format!(
                    "trial index {} appears twice in class {}",
                    trial.trial_index, trial.class_label
                )));
            }
            if let Some(((r, c), _)) = trial.data.indexed_iter().find(|(_, v)| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "class {} trial {} sample {} channel {}",
                    trial.class_label, trial.trial_index, r, c
                )));
            }
        }
        Ok(Self {
            trials,
            channel_count,
            samples_per_trial,
            class_labels,
        })
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn samples_per_trial(&self) -> usize {
        self.samples_per_trial
    }

    pub fn class_labels(&self) -> &BTreeSet<i64> {
        &self.class_labels
    }

    pub fn class_count(&self) -> usize {
        self.class_labels.len()
    }

    /// Trials grouped by class (ascending label), each group in trial-index order.
    pub fn trials_by_class(&self) -> BTreeMap<i64, Vec<&Trial>> {
        let mut groups: BTreeMap<i64, Vec<&Trial>> =
            self.class_labels.iter().map(|&c| (c, Vec::new())).collect();
        for trial in &self.trials {
            groups.entry(trial.class_label).or_default().push(trial);
        }
        for group in groups.values_mut() {
            group.sort_by_key(|t| t.trial_index);
        }
        groups
    }

    /// The common trial count per class, or an error when classes differ.
    pub fn trials_per_class(&self) -> Result<usize> {
        let groups = self.trials_by_class();
        let counts: BTreeSet<usize> = groups.values().map(Vec::len).collect();
        match counts.len() {
            1 => Ok(*counts.iter().next().unwrap()),
            _ => Err(Error::InvalidDataset(format!(
                "unequal trials per class: {:?}",
                groups.iter().map(|(c, t)| (*c, t.len())).collect::<Vec<_>>()
            ))),
        }
    }

    /// Trial indices usable for horizontal pairing, ascending.
    pub fn paired_trial_indices(&self) -> Result<Vec<usize>> {
        self.trials_per_class()?;
        let groups = self.trials_by_class();
        let mut iter = groups.values();
        let first: BTreeSet<usize> = iter.next().unwrap().iter().map(|t| t.trial_index).collect();
        for group in iter {
            let other: BTreeSet<usize> = group.iter().map(|t| t.trial_index).collect();
            if other != first {
                return Err(Error::InvalidDataset(
                    "trial indices differ between classes".into(),
                ));
            }
        }
        Ok(first.into_iter().collect())
    }
}

/// A flat rows × channels matrix with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    features: Array2<f64>,
    labels: Vec<i64>,
    channel_ids: Vec<usize>,
}

impl LabeledMatrix {
    pub fn new(features: Array2<f64>, labels: Vec<i64>, channel_ids: Vec<usize>) -> Result<Self> {
        let (rows, cols) = features.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDataset(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if labels.len() != rows {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: rows,
            });
        }
        if channel_ids.len() != cols {
            return Err(Error::LengthMismatch {
                left: channel_ids.len(),
                right: cols,
            });
        }
        let mut seen = HashSet::with_capacity(cols);
        for &id in &channel_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateChannel(id));
            }
        }
        Ok(Self {
            features,
            labels,
            channel_ids,
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

    pub fn rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn channels(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Column position of a channel id.
    pub fn position_of(&self, channel: usize) -> Option<usize> {
        self.channel_ids.iter().position(|&c| c == channel)
    }

    /// Distinct labels, ascending. Position in this list is the dense class index.
    pub fn classes(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self.labels.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Labels mapped to dense indices `0..K` following [`Self::classes`].
    pub fn dense_labels(&self) -> (Vec<i64>, Vec<usize>) {
        let classes = self.classes();
        let dense = self
            .labels
            .iter()
            .map(|l| classes.binary_search(l).unwrap())
            .collect();
        (classes, dense)
    }

    /// Row indices per class, ascending label order.
    pub fn rows_by_class(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, &l) in self.labels.iter().enumerate() {
            map.entry(l).or_default().push(i);
        }
        map
    }

    pub(crate) fn require_supervised(&self) -> Result<()> {
        let classes = self.classes();
        if classes.len() < 2 {
            return Err(Error::DegenerateClasses(format!(
                "need at least 2 classes, found {:?}",
                classes
            )));
        }
        Ok(())
    }

    /// Rows selected by index, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let features = self.features.select(ndarray::Axis(0), rows);
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        Self::new(features, labels, self.channel_ids.clone())
    }

    /// Same data with a different label vector.
    pub fn with_labels(&self, labels: Vec<i64>) -> Result<Self> {
        Self::new(self.features.clone(), labels, self.channel_ids.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels(xs: &[i64]) -> BTreeSet<i64> {
        xs.iter().copied().collect()
    }

    #[test]
    fn tensor_rejects_wrong_shape() {
        let t = Trial::new(1, 0, Array2::zeros((3, 2)));
        let err = TrialTensor::new(vec![t], 3, 3, labels(&[1, 2])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn tensor_rejects_nan_and_unknown_class() {
        let mut data = Array2::zeros((2, 2));
        data[[1, 1]] = f64::NAN;
        let err = TrialTensor::new(vec![Trial::new(1, 0, data)], 2, 2, labels(&[1, 2])).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));

        let t = Trial::new(7, 0, Array2::zeros((2, 2)));
        let err = TrialTensor::new(vec![t], 2, 2, labels(&[1, 2])).unwrap_err();
        assert!(matches!(err, Error::UnknownClass { label: 7, .. }));
    }

    #[test]
    fn tensor_requires_two_classes_and_unique_trial_index() {
        let t = Trial::new(1, 0, Array2::zeros((2, 2)));
        assert!(TrialTensor::new(vec![t.clone()], 2, 2, labels(&[1])).is_err());
        let err = TrialTensor::new(vec![t.clone(), t], 2, 2, labels(&[1, 2])).unwrap_err();
        assert!(matches!(err, Error::InvalidDataset(_)));
    }

    #[test]
    fn unequal_trials_per_class_detected_at_pairing() {
        let trials = vec![
            Trial::new(1, 0, Array2::zeros((1, 1))),
            Trial::new(1, 1, Array2::zeros((1, 1))),
            Trial::new(2, 0, Array2::zeros((1, 1))),
        ];
        let tensor = TrialTensor::new(trials, 1, 1, labels(&[1, 2])).unwrap();
        assert!(tensor.trials_per_class().is_err());
        assert!(tensor.paired_trial_indices().is_err());
    }

    #[test]
    fn matrix_validates_lengths_and_ids() {
        let f = array![[1.0, 2.0], [3.0, 4.0]];
        assert!(LabeledMatrix::new(f.clone(), vec![1], vec![0, 1]).is_err());
        assert!(matches!(
            LabeledMatrix::new(f.clone(), vec![1, 2], vec![4, 4]),
            Err(Error::DuplicateChannel(4))
        ));
        let m = LabeledMatrix::new(f, vec![5, -1], vec![9, 3]).unwrap();
        assert_eq!(m.classes(), vec![-1, 5]);
        assert_eq!(m.dense_labels().1, vec![1, 0]);
        assert_eq!(m.position_of(3), Some(1));
    }
}
