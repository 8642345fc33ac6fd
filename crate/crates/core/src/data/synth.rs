//! Synthetic trial tensors with planted informative and redundant channels.

use std::collections::{BTreeSet, HashSet};

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Trial, TrialTensor};
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub samples_per_trial: usize,
    pub channel_count: usize,
    pub trials_per_class: usize,
    pub class_count: usize,
    #[serde(default)]
    pub informative_channels: Vec<usize>,
    /// Class-mean separation in units of `noise_sigma`.
    #[serde(default)]
    pub effect_size: f64,
    /// `(source, copy)`: the copy channel repeats the source plus σ/100 jitter.
    #[serde(default)]
    pub redundant_pairs: Vec<(usize, usize)>,
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
}

fn default_sigma() -> f64 {
    1.0
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.samples_per_trial == 0
            || self.channel_count == 0
            || self.trials_per_class == 0
            || self.class_count < 2
        {
            return bad("synth shape needs positive sizes and at least 2 classes".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma > 0.0) {
            return bad(format!("noise_sigma must be positive, got {}", self.noise_sigma));
        }
        if !(self.effect_size.is_finite() && self.effect_size >= 0.0) {
            return bad(format!("effect_size must be finite and >= 0, got {}", self.effect_size));
        }
        let informative: HashSet<usize> = self.informative_channels.iter().copied().collect();
        if let Some(&c) = self.informative_channels.iter().find(|&&c| c >= self.channel_count) {
            return bad(format!("informative channel {c} out of range"));
        }
        let sources: HashSet<usize> = self.redundant_pairs.iter().map(|p| p.0).collect();
        let mut copies = HashSet::new();
        for &(src, copy) in &self.redundant_pairs {
            if src >= self.channel_count || copy >= self.channel_count {
                return bad(format!("redundant pair ({src}, {copy}) out of range"));
            }
            if src == copy {
                return bad(format!("channel {src} cannot copy itself"));
            }
            if informative.contains(&copy) {
                return bad(format!("copy channel {copy} is also an informative source"));
            }
            if sources.contains(&copy) {
                return bad(format!("copy channel {copy} is itself a copy source"));
            }
            if !copies.insert(copy) {
                return bad(format!("channel {copy} is the copy in two pairs"));
            }
        }
        Ok(())
    }

    /// Mean offset of class `k` (0-based) in signal units: spread evenly over
    /// `[-e·σ/2, +e·σ/2]`, i.e. `±e·σ/2` for two classes.
    pub fn class_offset(&self, k: usize) -> f64 {
        let frac = k as f64 / (self.class_count - 1) as f64 - 0.5;
        self.effect_size * self.noise_sigma * frac
    }
}

/// Gaussian noise on every channel, class-dependent offsets on informative
/// channels, jittered copies on redundant channels. Class labels are `1..=K`.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<TrialTensor> {
    spec.validate()?;
    let mut rng = seeded(seed);
    let (samples, channels) = (spec.samples_per_trial, spec.channel_count);
    let sigma = spec.noise_sigma;
    let jitter = sigma / 100.0;
    let mut trials = Vec::with_capacity(spec.class_count * spec.trials_per_class);
    for k in 0..spec.class_count {
        let offset = spec.class_offset(k);
        for t in 0..spec.trials_per_class {
            let mut data = Array2::from_shape_simple_fn((samples, channels), || {
                sigma * rng.sample::<f64, _>(StandardNormal)
            });
            for &c in &spec.informative_channels {
                data.column_mut(c).mapv_inplace(|v| v + offset);
            }
            for &(src, copy) in &spec.redundant_pairs {
                for s in 0..samples {
                    let noise: f64 = rng.sample(StandardNormal);
                    data[[s, copy]] = data[[s, src]] + jitter * noise;
                }
            }
            trials.push(Trial::new(k as i64 + 1, t, data));
        }
    }
    let labels: BTreeSet<i64> = (1..=spec.class_count as i64).collect();
    TrialTensor::new(trials, channels, samples, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::form_vertical;

    fn spec(effect: f64) -> SynthSpec {
        SynthSpec {
            samples_per_trial: 200,
            channel_count: 16,
            trials_per_class: 5,
            class_count: 2,
            informative_channels: vec![3],
            effect_size: effect,
            redundant_pairs: vec![],
            noise_sigma: 1.0,
        }
    }

    /// Absolute class-mean gap per channel, straight from the generated rows.
    fn mean_gaps(tensor: &TrialTensor) -> Vec<f64> {
        let m = form_vertical(tensor).unwrap();
        let mut sums = vec![[0.0f64; 2]; m.channels()];
        let mut counts = [0usize; 2];
        for (i, &l) in m.labels().iter().enumerate() {
            let k = (l - 1) as usize;
            counts[k] += 1;
            for c in 0..m.channels() {
                sums[c][k] += m.features()[[i, c]];
            }
        }
        sums.iter()
            .map(|s| (s[1] / counts[1] as f64 - s[0] / counts[0] as f64).abs())
            .collect()
    }

    #[test]
    fn planted_channel_has_largest_gap() {
        let t = generate_synthetic(&spec(2.0), 7).unwrap();
        let gaps = mean_gaps(&t);
        let best = (0..16).max_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).unwrap();
        assert_eq!(best, 3);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_synthetic(&spec(1.0), 42).unwrap();
        let b = generate_synthetic(&spec(1.0), 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&spec(1.0), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gap_converges_to_effect() {
        // 10^4 samples per class; standard error of a difference of means is sqrt(2/n)
        let mut s = spec(1.5);
        s.samples_per_trial = 2000;
        let t = generate_synthetic(&s, 1).unwrap();
        let gap = mean_gaps(&t)[3];
        let se = (2.0 / 10_000.0f64).sqrt();
        assert!((gap - 1.5).abs() < 3.0 * se, "gap {gap}");
    }

    #[test]
    fn redundant_copy_tracks_source() {
        let mut s = spec(2.0);
        s.redundant_pairs = vec![(3, 9)];
        let t = generate_synthetic(&s, 5).unwrap();
        for trial in t.trials() {
            for row in trial.data.outer_iter() {
                assert!((row[9] - row[3]).abs() < 0.1);
            }
        }
    }

    #[test]
    fn three_class_offsets_are_symmetric() {
        let mut s = spec(2.0);
        s.class_count = 3;
        assert_eq!(s.class_offset(0), -1.0);
        assert_eq!(s.class_offset(1), 0.0);
        assert_eq!(s.class_offset(2), 1.0);
    }

    #[test]
    fn validation_errors() {
        let mut s = spec(1.0);
        s.informative_channels = vec![16];
        assert!(generate_synthetic(&s, 0).is_err());
        let mut s = spec(1.0);
        s.redundant_pairs = vec![(0, 3)];
        assert!(s.validate().is_err());
        let mut s = spec(1.0);
        s.noise_sigma = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec(1.0);
        s.class_count = 1;
        assert!(s.validate().is_err());
    }
}
