use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a continuous column is binned before mutual-information estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// Three levels split at μ−σ and μ+σ (sample standard deviation).
    #[default]
    MeanStd,
    /// `bins` equal-width intervals between the column minimum and maximum.
    EqualWidth { bins: usize },
}

impl Discretization {
    pub fn levels(&self) -> usize {
        match self {
            Discretization::MeanStd => 3,
            Discretization::EqualWidth { bins } => *bins,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels() < 2 {
            return Err(Error::InvalidParameter(
                "discretization needs at least 2 levels".into(),
            ));
        }
        Ok(())
    }
}

fn is_constant(column: &[f64]) -> bool {
    column.windows(2).all(|w| w[0] == w[1])
}

pub fn discretize(column: &[f64], scheme: Discretization) -> Vec<usize> {
    match scheme {
        Discretization::MeanStd => {
            if is_constant(column) {
                return vec![1; column.len()];
            }
            let n = column.len() as f64;
            let mean = column.iter().sum::<f64>() / n;
            let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            column
                .iter()
                .map(|&x| {
                    if x < mean - sd {
                        0
                    } else if x > mean + sd {
                        2
                    } else {
                        1
                    }
                })
                .collect()
        }
        Discretization::EqualWidth { bins } => {
            if is_constant(column) {
                return vec![0; column.len()];
            }
            let (lo, hi) = column
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let width = hi - lo;
            column
                .iter()
                .map(|&x| (((x - lo) / width * bins as f64) as usize).min(bins - 1))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn sample_sigma_covers_three_points() {
        // sample sd of [-10, 0, 10] is exactly 10, so no point is strictly outside μ±σ
        assert_eq!(discretize(&[-10.0, 0.0, 10.0], Discretization::MeanStd), vec![1, 1, 1]);
    }

    #[test]
    fn constant_column_is_middle_level() {
        assert_eq!(discretize(&[0.1; 7], Discretization::MeanStd), vec![1; 7]);
        assert_eq!(discretize(&[0.1; 3], Discretization::EqualWidth { bins: 4 }), vec![0; 3]);
    }

    #[test]
    fn gaussian_level_mass() {
        let mut rng = crate::rng::seeded(99);
        let xs: Vec<f64> = (0..1_000_000).map(|_| rng.sample(StandardNormal)).collect();
        let levels = discretize(&xs, Discretization::MeanStd);
        let mut counts = [0usize; 3];
        for l in levels {
            counts[l] += 1;
        }
        // Φ(-1) = 0.158655, Φ(1) - Φ(-1) = 0.682689
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / 1e6).collect();
        assert!((p[0] - 0.158655).abs() < 0.01);
        assert!((p[1] - 0.682689).abs() < 0.01);
        assert!((p[2] - 0.158655).abs() < 0.01);
    }

    #[test]
    fn equal_width_bins() {
        let xs = [0.0, 0.24, 0.26, 0.5, 0.99, 1.0];
        assert_eq!(discretize(&xs, Discretization::EqualWidth { bins: 4 }), vec![0, 0, 1, 2, 3, 3]);
        assert!(Discretization::EqualWidth { bins: 1 }.validate().is_err());
    }
}
