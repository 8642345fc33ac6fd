use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{rho, sweep, SweepResult};
use crate::aggregation::{aggregate, collect_rank_matrix_with, AggregatedRanking, RankMatrix};
use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::data::{form_horizontal, form_vertical, split, subsample_rows, LabeledMatrix, TrialTensor};
use crate::error::{Error, Result};
use crate::rankers::{Method, RankerConfig, RankingList};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Horizontal,
    Vertical,
}

impl Setting {
    pub fn name(&self) -> &'static str {
        match self {
            Setting::Horizontal => "horizontal",
            Setting::Vertical => "vertical",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "horizontal" => Ok(Setting::Horizontal),
            "vertical" => Ok(Setting::Vertical),
            _ => Err(Error::Config(format!("unknown setting {s:?}"))),
        }
    }
}

/// Which ranking each trial is swept on in the horizontal setting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizontalRanking {
    /// The fused ranking shared by every trial.
    #[default]
    Shared,
    /// Each trial's own ranking from the rank matrix.
    PerTrial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    pub split_fraction: f64,
    pub seed: u64,
    /// Caps train and test rows seen by the sweep (uniform seeded subsample).
    pub sweep_row_cap: Option<usize>,
    pub horizontal_ranking: HorizontalRanking,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            split_fraction: 0.7,
            seed: 0,
            sweep_row_cap: None,
            horizontal_ranking: HorizontalRanking::Shared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub sweep: SweepResult,
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub method: Method,
    pub classifier: ClassifierKind,
    pub setting: Setting,
    /// `|F|` (vertical) or the mean of per-trial `best_n` (horizontal).
    pub selected: f64,
    pub ca: f64,
    pub baseline_ca: f64,
    pub rho: f64,
    /// The ranking that was swept (the fused one in the horizontal setting).
    pub ranking: Vec<usize>,
    /// Accuracy per prefix length; averaged over trials when horizontal.
    pub curve: Vec<(usize, f64)>,
    /// Empty for the vertical setting.
    pub trials: Vec<TrialResult>,
}

impl ExperimentReport {
    /// A single selected channel makes ρ equal to the accuracy itself.
    pub fn single_feature(&self) -> bool {
        self.selected == 1.0
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    sum / n as f64
}

fn cap_rows(matrix: LabeledMatrix, cap: Option<usize>, seed: u64) -> Result<LabeledMatrix> {
    match cap {
        Some(cap) if matrix.rows() > cap => subsample_rows(&matrix, cap, seed),
        _ => Ok(matrix),
    }
}

/// Split, optionally capped for the sweep.
pub(crate) fn sweep_partitions(matrix: &LabeledMatrix, options: &ExperimentOptions, seed: u64) -> Result<(LabeledMatrix, LabeledMatrix)> {
    let (train, test) = split(matrix, options.split_fraction, seed)?;
    Ok((
        cap_rows(train, options.sweep_row_cap, derive_seed(seed, 1))?,
        cap_rows(test, options.sweep_row_cap, derive_seed(seed, 2))?,
    ))
}

/// Vertical data after splitting and ranking on the training partition.
#[derive(Debug, Clone)]
pub struct VerticalPrepared {
    pub train: LabeledMatrix,
    pub test: LabeledMatrix,
    pub ranking: RankingList,
}

pub fn prepare_vertical(tensor: &TrialTensor, ranker: &RankerConfig, options: &ExperimentOptions) -> Result<VerticalPrepared> {
    let matrix = form_vertical(tensor)?;
    let (train, test) = split(&matrix, options.split_fraction, options.seed)?;
    drop(matrix);
    // the ranker never sees the test partition
    let ranking = ranker.rank(&train)?;
    Ok(VerticalPrepared { train, test, ranking })
}

pub fn evaluate_vertical(
    prepared: &VerticalPrepared,
    dataset: &str,
    spec: &ClassifierSpec,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let train = cap_rows(prepared.train.clone(), options.sweep_row_cap, derive_seed(options.seed, 1))?;
    let test = cap_rows(prepared.test.clone(), options.sweep_row_cap, derive_seed(options.seed, 2))?;
    let result = sweep(&prepared.ranking.order, &train, &test, spec)?;
    let selected = result.best_n as f64;
    Ok(ExperimentReport {
        dataset: dataset.to_string(),
        method: prepared.ranking.method,
        classifier: spec.kind,
        setting: Setting::Vertical,
        selected,
        ca: result.best_accuracy,
        baseline_ca: result.baseline_accuracy,
        rho: rho(result.best_accuracy, selected)?,
        ranking: prepared.ranking.order.clone(),
        curve: result.per_n,
        trials: Vec::new(),
    })
}

/// form_vertical → split → rank on train → sweep.
pub fn run_vertical_experiment(
    tensor: &TrialTensor,
    dataset: &str,
    ranker: &RankerConfig,
    spec: &ClassifierSpec,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    evaluate_vertical(&prepare_vertical(tensor, ranker, options)?, dataset, spec, options)
}

/// Per-trial rankings and their fusion.
#[derive(Debug, Clone)]
pub struct HorizontalPrepared {
    pub method: Method,
    pub rank_matrix: RankMatrix,
    pub aggregated: AggregatedRanking,
    pub per_trial: Vec<RankingList>,
}

/// Ranks every paired trial on its full data, then fuses the rankings.
pub fn prepare_horizontal(tensor: &TrialTensor, ranker: &RankerConfig) -> Result<HorizontalPrepared> {
    let (rank_matrix, per_trial) = collect_rank_matrix_with(tensor, |m| ranker.rank(m))?;
    let aggregated = aggregate(&rank_matrix);
    Ok(HorizontalPrepared {
        method: ranker.method(),
        rank_matrix,
        aggregated,
        per_trial,
    })
}

pub fn evaluate_horizontal(
    tensor: &TrialTensor,
    prepared: &HorizontalPrepared,
    dataset: &str,
    spec: &ClassifierSpec,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let ranking_for = |column: usize| match options.horizontal_ranking {
        HorizontalRanking::Shared => prepared.aggregated.final_ranking.as_slice(),
        HorizontalRanking::PerTrial => prepared.per_trial[column].order.as_slice(),
    };
    horizontal_report(
        tensor,
        &prepared.rank_matrix.trial_ids,
        ranking_for,
        prepared.method,
        &prepared.aggregated.final_ranking,
        dataset,
        spec,
        options,
    )
}

/// Sweeps one given ranking on every paired trial.
pub fn sweep_horizontal(
    tensor: &TrialTensor,
    ranking: &RankingList,
    dataset: &str,
    spec: &ClassifierSpec,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let trial_ids = tensor.paired_trial_indices()?;
    horizontal_report(
        tensor,
        &trial_ids,
        |_| ranking.order.as_slice(),
        ranking.method,
        &ranking.order,
        dataset,
        spec,
        options,
    )
}

#[allow(clippy::too_many_arguments)]
fn horizontal_report<'a, F>(
    tensor: &TrialTensor,
    trial_ids: &[usize],
    ranking_for: F,
    method: Method,
    reported_ranking: &[usize],
    dataset: &str,
    spec: &ClassifierSpec,
    options: &ExperimentOptions,
) -> Result<ExperimentReport>
where
    F: Fn(usize) -> &'a [usize] + Sync,
{
    let trials: Vec<TrialResult> = trial_ids
        .par_iter()
        .enumerate()
        .map(|(column, &trial)| {
            form_horizontal(tensor, trial)
                .and_then(|m| sweep_partitions(&m, options, options.seed))
                .and_then(|(train, test)| sweep(ranking_for(column), &train, &test, spec))
                .map(|sweep| TrialResult { trial, sweep })
                .map_err(|e| e.in_trial(trial))
        })
        .collect::<Result<_>>()?;

    let selected = mean(trials.iter().map(|t| t.sweep.best_n as f64));
    let ca = mean(trials.iter().map(|t| t.sweep.best_accuracy));
    let baseline_ca = mean(trials.iter().map(|t| t.sweep.baseline_accuracy));
    let len = trials.iter().map(|t| t.sweep.per_n.len()).min().unwrap_or(0);
    let curve = (0..len)
        .map(|i| (i + 1, mean(trials.iter().map(|t| t.sweep.per_n[i].1))))
        .collect();
    Ok(ExperimentReport {
        dataset: dataset.to_string(),
        method,
        classifier: spec.kind,
        setting: Setting::Horizontal,
        selected,
        ca,
        baseline_ca,
        rho: rho(ca, selected)?,
        ranking: reported_ranking.to_vec(),
        curve,
        trials,
    })
}

/// Rank matrix → positional mode → dedupe, then a per-trial sweep of the
/// fused ranking with averaged results.
pub fn run_horizontal_experiment(
    tensor: &TrialTensor,
    dataset: &str,
    ranker: &RankerConfig,
    spec: &ClassifierSpec,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let prepared = prepare_horizontal(tensor, ranker)?;
    evaluate_horizontal(tensor, &prepared, dataset, spec, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SynthSpec, Trial};
    use std::collections::BTreeSet;

    fn planted(seed: u64) -> TrialTensor {
        let spec = SynthSpec {
            samples_per_trial: 60,
            channel_count: 6,
            trials_per_class: 3,
            class_count: 2,
            informative_channels: vec![2],
            effect_size: 3.0,
            redundant_pairs: vec![],
            noise_sigma: 1.0,
        };
        generate_synthetic(&spec, seed).unwrap()
    }

    #[test]
    fn vertical_report_is_consistent() {
        let t = planted(1);
        let r = run_vertical_experiment(
            &t,
            "p",
            &RankerConfig::default_for(Method::Mrmr),
            &ClassifierSpec::default(),
            &ExperimentOptions::default(),
        )
        .unwrap();
        assert_eq!(r.ranking[0], 2);
        assert_eq!(r.rho, r.ca / r.selected);
        assert!(r.trials.is_empty());
        assert_eq!(r.curve.len(), 6);
    }

    #[test]
    fn horizontal_means_are_exact() {
        let t = planted(3);
        let r = run_horizontal_experiment(
            &t,
            "p",
            &RankerConfig::default_for(Method::Relief),
            &ClassifierSpec::new(ClassifierKind::Lda),
            &ExperimentOptions::default(),
        )
        .unwrap();
        assert_eq!(r.trials.len(), 3);
        let n: f64 = r.trials.iter().map(|t| t.sweep.best_n as f64).sum::<f64>() / 3.0;
        assert_eq!(r.selected, n);
        assert_eq!(r.rho, r.ca / r.selected);
    }

    #[test]
    fn identical_trials_give_identical_bests() {
        let base = planted(4);
        let first = base.trials_by_class();
        let mut trials = Vec::new();
        for (&class, list) in &first {
            for t in 0..3 {
                trials.push(Trial::new(class, t, list[0].data.clone()));
            }
        }
        let labels: BTreeSet<i64> = first.keys().copied().collect();
        let t = TrialTensor::new(trials, 6, 60, labels).unwrap();
        let options = ExperimentOptions {
            seed: 9,
            ..Default::default()
        };
        let prepared = prepare_horizontal(&t, &RankerConfig::default_for(Method::Laplacian)).unwrap();
        assert_eq!(prepared.aggregated.final_ranking, prepared.per_trial[0].order);
        let r = evaluate_horizontal(&t, &prepared, "same", &ClassifierSpec::default(), &options).unwrap();
        for t in &r.trials {
            assert_eq!(t.sweep, r.trials[0].sweep);
        }
        assert_eq!(r.ca, r.trials[0].sweep.best_accuracy);
        assert_eq!(r.selected, r.trials[0].sweep.best_n as f64);
    }

    #[test]
    fn row_cap_limits_sweep_rows() {
        let t = planted(5);
        let options = ExperimentOptions {
            sweep_row_cap: Some(50),
            ..Default::default()
        };
        let prepared = prepare_vertical(&t, &RankerConfig::default_for(Method::Mrmr), &options).unwrap();
        assert_eq!(prepared.train.rows(), 252);
        let a = evaluate_vertical(&prepared, "p", &ClassifierSpec::default(), &options).unwrap();
        let b = evaluate_vertical(&prepared, "p", &ClassifierSpec::default(), &options).unwrap();
        assert_eq!(a, b);
        // 50 test rows: every accuracy is a multiple of 2%
        assert!(a.curve.iter().all(|&(_, acc)| (acc / 2.0).fract() == 0.0));
    }

    #[test]
    fn setting_parse() {
        assert_eq!("vertical".parse::<Setting>().unwrap(), Setting::Vertical);
        assert!("diagonal".parse::<Setting>().is_err());
    }
}
