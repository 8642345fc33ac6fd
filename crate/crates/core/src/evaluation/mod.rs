//! Prefix sweeps, the ρ measure, and the horizontal/vertical experiment drivers.

pub mod experiment;
pub mod report;
pub mod sweep;

pub use experiment::{
    evaluate_horizontal, evaluate_vertical, prepare_horizontal, prepare_vertical, run_horizontal_experiment,
    run_vertical_experiment, sweep_horizontal, ExperimentOptions, ExperimentReport, HorizontalPrepared, HorizontalRanking, Setting,
    TrialResult, VerticalPrepared,
};
pub use report::{format_significant, Combination, Precision};
pub use sweep::{baseline_accuracy, prefix_accuracies, prefix_accuracies_reference, rho, sweep, SweepResult};
