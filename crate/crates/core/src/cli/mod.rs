//! Command-line interface: `synth`, `rank`, `experiment` and `sweep`.
//!
//! Exit codes are 0 on success, 1 when the pipeline fails, and 2 for usage
//! errors (bad flags, bad configuration).

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aggregation::AggregationFile;
use crate::classifiers::ClassifierKind;
use crate::data::{form_vertical, generate_synthetic, load_dataset, split, write_dataset, Manifest, SynthSpec, TrialTensor};
use crate::error::{Error, Result};
use crate::evaluation::report::{write_curve, write_report, write_trial_curves, write_trials};
use crate::evaluation::{
    evaluate_horizontal, evaluate_vertical, prepare_horizontal, prepare_vertical, sweep_horizontal, Combination,
    ExperimentOptions, ExperimentReport, HorizontalRanking, Precision, Setting, VerticalPrepared,
};
use crate::rankers::{
    Discretization, LaplacianParams, Method, NeighborMode, ProbeOrder, RankerConfig, RankingFile, RankingList,
    ReliefParams,
};

pub use config::{ClassifierParams, DatasetSource, RunConfig, SettingChoice};

/// Environment variable capping worker threads (0 = one per core).
pub const THREADS_ENV: &str = "CHANNELRANK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "channelrank", version, about = "Rank, select and evaluate channels of trial-structured recordings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with planted informative channels.
    Synth(SynthArgs),
    /// Rank the channels of a dataset.
    Rank(RankArgs),
    /// Run a grid of methods, settings and classifiers from a JSON config.
    Experiment(ExperimentArgs),
    /// Sweep the prefixes of an existing ranking with one classifier.
    Sweep(SweepArgs),
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_classifier(s: &str) -> std::result::Result<ClassifierKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_setting(s: &str) -> std::result::Result<Setting, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected SOURCE:COPY, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub channels: usize,
    /// Trials per class.
    #[arg(long)]
    pub trials: usize,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Channels whose mean depends on the class.
    #[arg(long, value_delimiter = ',')]
    pub informative: Vec<usize>,
    /// Class-mean separation in noise standard deviations.
    #[arg(long, default_value_t = 1.0)]
    pub effect: f64,
    /// Near-copies as SOURCE:COPY pairs.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub redundant: Vec<(usize, usize)>,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "synthetic")]
    pub name: String,
    /// Data CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest JSON to write.
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NeighborArg {
    Nearest,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Sequential,
    Random,
}

/// Ranker parameter overrides.
#[derive(Debug, Args, Default)]
pub struct RankerFlags {
    /// Relief probe count (default: every row).
    #[arg(long)]
    pub relief_iterations: Option<usize>,
    #[arg(long, value_enum)]
    pub relief_neighbors: Option<NeighborArg>,
    #[arg(long, value_enum)]
    pub relief_order: Option<OrderArg>,
    /// Equal-width bins for mRMR instead of mean ± std levels.
    #[arg(long)]
    pub mrmr_bins: Option<usize>,
    #[arg(long)]
    pub laplacian_k: Option<usize>,
    /// Heat-kernel width (default: mean squared edge length).
    #[arg(long)]
    pub laplacian_t: Option<f64>,
    /// Row cap for the Laplacian graph; 0 disables it.
    #[arg(long)]
    pub laplacian_cap: Option<usize>,
}

impl RankerFlags {
    fn apply(&self, relief: &mut ReliefParams, mrmr: &mut crate::rankers::MrmrParams, laplacian: &mut LaplacianParams) {
        if let Some(n) = self.relief_iterations {
            relief.iterations = Some(n);
        }
        if let Some(m) = self.relief_neighbors {
            relief.neighbor_mode = match m {
                NeighborArg::Nearest => NeighborMode::Nearest,
                NeighborArg::Random => NeighborMode::Random,
            };
        }
        if let Some(o) = self.relief_order {
            relief.probe_order = match o {
                OrderArg::Sequential => ProbeOrder::Sequential,
                OrderArg::Random => ProbeOrder::Random,
            };
        }
        if let Some(bins) = self.mrmr_bins {
            mrmr.discretization = Discretization::EqualWidth { bins };
        }
        if let Some(k) = self.laplacian_k {
            laplacian.k_neighbors = k;
        }
        if let Some(t) = self.laplacian_t {
            laplacian.kernel_width = Some(t);
        }
        if let Some(cap) = self.laplacian_cap {
            laplacian.subsample_cap = (cap > 0).then_some(cap);
        }
    }
}

/// Classifier parameter overrides.
#[derive(Debug, Args, Default)]
pub struct ClassifierFlags {
    #[arg(long)]
    pub knn_k: Option<usize>,
    #[arg(long)]
    pub tree_max_depth: Option<usize>,
    #[arg(long)]
    pub tree_min_leaf: Option<usize>,
    #[arg(long)]
    pub lda_ridge: Option<f64>,
}

impl ClassifierFlags {
    fn apply(&self, params: &mut ClassifierParams) {
        if let Some(k) = self.knn_k {
            params.knn_k = k;
        }
        if let Some(d) = self.tree_max_depth {
            params.tree_max_depth = d;
        }
        if let Some(l) = self.tree_min_leaf {
            params.tree_min_leaf = l;
        }
        if let Some(r) = self.lda_ridge {
            params.lda_ridge = r;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum PrecisionArg {
    /// Six significant digits.
    #[default]
    Six,
    /// Shortest round-trip representation.
    Full,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Six => Precision::Six,
            PrecisionArg::Full => Precision::Full,
        }
    }
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    #[arg(long, value_parser = parse_setting, default_value = "vertical")]
    pub setting: Setting,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for randomized rankers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub ranker: RankerFlags,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SettingChoiceArg {
    Horizontal,
    Vertical,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HorizontalRankingArg {
    Shared,
    PerTrial,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Option<Vec<Method>>,
    #[arg(long, value_enum)]
    pub setting: Option<SettingChoiceArg>,
    #[arg(long, value_delimiter = ',', value_parser = parse_classifier)]
    pub classifiers: Option<Vec<ClassifierKind>>,
    #[arg(long)]
    pub split: Option<f64>,
    /// Row cap for each sweep partition; 0 disables it.
    #[arg(long)]
    pub sweep_row_cap: Option<usize>,
    #[arg(long, value_enum)]
    pub horizontal_ranking: Option<HorizontalRankingArg>,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Six)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub ranker: RankerFlags,
    #[command(flatten)]
    pub classifier: ClassifierFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Ranking JSON written by `rank`.
    #[arg(long)]
    pub ranking: PathBuf,
    #[arg(long, value_parser = parse_classifier, default_value = "knn")]
    pub classifier: ClassifierKind,
    #[arg(long, value_parser = parse_setting, default_value = "vertical")]
    pub setting: Setting,
    #[arg(long, default_value_t = 0.7)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub sweep_row_cap: Option<usize>,
    /// Curve CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Six)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub classifier_flags: ClassifierFlags,
}

/// Applies `CHANNELRANK_THREADS` to the global thread pool.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => cmd_synth(&args),
        Command::Rank(args) => cmd_rank(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        samples_per_trial: args.samples,
        channel_count: args.channels,
        trials_per_class: args.trials,
        class_count: args.classes,
        informative_channels: args.informative.clone(),
        effect_size: args.effect,
        redundant_pairs: args.redundant.clone(),
        noise_sigma: args.noise,
    };
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    let tensor = generate_synthetic(&spec, args.seed)?;
    write_dataset(&tensor, &args.name, &args.out, &args.manifest)?;
    log::info!(
        "wrote {} trials of {}x{} to {}",
        tensor.trials().len(),
        args.samples,
        args.channels,
        args.out.display()
    );
    Ok(())
}

pub fn cmd_rank(args: &RankArgs) -> Result<()> {
    let tensor = load_dataset(&args.input, &args.manifest)?;
    let mut relief = ReliefParams {
        seed: args.seed,
        ..Default::default()
    };
    let mut mrmr = Default::default();
    let mut laplacian = LaplacianParams {
        seed: args.seed,
        ..Default::default()
    };
    args.ranker.apply(&mut relief, &mut mrmr, &mut laplacian);
    let ranker = match args.method {
        Method::Relief => RankerConfig::Relief(relief),
        Method::Mrmr => RankerConfig::Mrmr(mrmr),
        Method::Laplacian => RankerConfig::Laplacian(laplacian),
    };
    match args.setting {
        Setting::Vertical => {
            let ranking = ranker.rank(&form_vertical(&tensor)?)?;
            write_json(&args.out, &RankingFile::new(&ranker, &ranking))
        }
        Setting::Horizontal => {
            let prepared = prepare_horizontal(&tensor, &ranker)?;
            let file = AggregationFile::new(&ranker, &prepared.rank_matrix, &prepared.aggregated);
            write_json(&args.out, &file)
        }
    }
}

fn load_source(source: &DatasetSource) -> Result<(TrialTensor, String)> {
    match source {
        DatasetSource::Files { data, manifest } => {
            let name = Manifest::read(manifest)?.name;
            Ok((load_dataset(data, manifest)?, name))
        }
        DatasetSource::Synth { spec, seed, name } => {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            let name = name.clone().unwrap_or_else(|| "synthetic".to_string());
            Ok((generate_synthetic(spec, *seed)?, name))
        }
    }
}

/// Config with command-line overrides applied.
pub fn resolve_config(args: &ExperimentArgs) -> Result<(RunConfig, PathBuf)> {
    let mut config = RunConfig::read(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(methods) = &args.methods {
        config.methods = methods.clone();
    }
    if let Some(setting) = args.setting {
        config.setting = match setting {
            SettingChoiceArg::Horizontal => SettingChoice::Horizontal,
            SettingChoiceArg::Vertical => SettingChoice::Vertical,
            SettingChoiceArg::Both => SettingChoice::Both,
        };
    }
    if let Some(classifiers) = &args.classifiers {
        config.classifiers = classifiers.clone();
    }
    if let Some(split) = args.split {
        config.split_fraction = split;
    }
    if let Some(cap) = args.sweep_row_cap {
        config.sweep_row_cap = (cap > 0).then_some(cap);
    }
    if let Some(h) = args.horizontal_ranking {
        config.horizontal_ranking = match h {
            HorizontalRankingArg::Shared => HorizontalRanking::Shared,
            HorizontalRankingArg::PerTrial => HorizontalRanking::PerTrial,
        };
    }
    args.ranker
        .apply(&mut config.relief, &mut config.mrmr, &mut config.laplacian);
    args.classifier.apply(&mut config.classifier);
    config.validate()?;
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out-dir or set output_dir".into()))?;
    Ok((config, out_dir))
}

/// Everything one experiment run produces, before it is written out.
pub struct ExperimentOutput {
    pub combinations: Vec<Combination>,
    /// `(file stem, JSON)` per (method, setting) ranking.
    pub rankings: Vec<(String, serde_json::Value)>,
}

pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutput> {
    let (tensor, dataset) = load_source(&config.dataset)?;
    let options: ExperimentOptions = config.options();
    let mut combinations = Vec::new();
    let mut rankings = Vec::new();
    for &method in &config.methods {
        let ranker = config.ranker(method);
        for setting in config.setting.settings() {
            log::info!("{dataset}: ranking with {method} ({setting})");
            let stem = format!("{method}_{setting}");
            let reports: Vec<(ClassifierKind, Result<ExperimentReport>)> = match setting {
                Setting::Vertical => match prepare_vertical(&tensor, &ranker, &options) {
                    Ok(prepared) => {
                        rankings.push((stem, ranking_json(&ranker, &prepared)));
                        config
                            .classifiers
                            .iter()
                            .map(|&kind| {
                                let spec = config.classifier.spec(kind);
                                (kind, evaluate_vertical(&prepared, &dataset, &spec, &options))
                            })
                            .collect()
                    }
                    Err(e) => failed_for_all(&config.classifiers, &e),
                },
                Setting::Horizontal => match prepare_horizontal(&tensor, &ranker) {
                    Ok(prepared) => {
                        let file = AggregationFile::new(&ranker, &prepared.rank_matrix, &prepared.aggregated);
                        rankings.push((stem, serde_json::to_value(file).expect("aggregation serializes")));
                        config
                            .classifiers
                            .iter()
                            .map(|&kind| {
                                let spec = config.classifier.spec(kind);
                                (kind, evaluate_horizontal(&tensor, &prepared, &dataset, &spec, &options))
                            })
                            .collect()
                    }
                    Err(e) => failed_for_all(&config.classifiers, &e),
                },
            };
            for (classifier, result) in reports {
                if let Err(e) = &result {
                    log::error!("{method}/{setting}/{classifier} failed: {e}");
                }
                combinations.push(Combination {
                    dataset: dataset.clone(),
                    method,
                    setting,
                    classifier,
                    outcome: result.map_err(|e| e.to_string()),
                });
            }
        }
    }
    Ok(ExperimentOutput { combinations, rankings })
}

fn ranking_json(ranker: &RankerConfig, prepared: &VerticalPrepared) -> serde_json::Value {
    serde_json::to_value(RankingFile::new(ranker, &prepared.ranking)).expect("ranking serializes")
}

fn failed_for_all(classifiers: &[ClassifierKind], e: &Error) -> Vec<(ClassifierKind, Result<ExperimentReport>)> {
    classifiers
        .iter()
        .map(|&k| (k, Err(Error::InvalidDataset(format!("ranking failed: {e}")))))
        .collect()
}

/// Writes `report.csv`, `rankings/`, `curves/` and (horizontal) `trials/`.
pub fn write_experiment(out_dir: &Path, output: &ExperimentOutput, precision: Precision) -> Result<()> {
    let rankings_dir = out_dir.join("rankings");
    let curves_dir = out_dir.join("curves");
    let trials_dir = out_dir.join("trials");
    for dir in [out_dir, &rankings_dir, &curves_dir] {
        create_dir(dir)?;
    }
    write_report(&out_dir.join("report.csv"), &output.combinations, precision)?;
    for (stem, json) in &output.rankings {
        write_json(&rankings_dir.join(format!("{stem}.json")), json)?;
    }
    for combo in &output.combinations {
        let Ok(report) = &combo.outcome else { continue };
        write_curve(&curves_dir.join(format!("{}.csv", combo.stem())), &report.curve, precision)?;
        if !report.trials.is_empty() {
            create_dir(&trials_dir)?;
            write_trials(&trials_dir.join(format!("{}.csv", combo.stem())), report, precision)?;
            write_trial_curves(&trials_dir.join(format!("{}_curves.csv", combo.stem())), report, precision)?;
        }
    }
    Ok(())
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let (config, out_dir) = resolve_config(args)?;
    let output = run_experiment(&config)?;
    write_experiment(&out_dir, &output, args.precision.into())?;
    let failed = output.combinations.iter().filter(|c| c.outcome.is_err()).count();
    if failed == output.combinations.len() {
        return Err(Error::AllCombinationsFailed(failed));
    }
    if failed > 0 {
        log::warn!("{failed} of {} combinations failed", output.combinations.len());
    }
    Ok(())
}

/// A ranking file from `rank`: a plain ranking or a horizontal aggregation.
fn read_ranking(path: &Path) -> Result<RankingList> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let json_err = |source| Error::Json {
        path: path.to_path_buf(),
        source,
    };
    if value.get("final").is_some() {
        let file: AggregationFile = serde_json::from_value(value).map_err(json_err)?;
        Ok(RankingList {
            method: file.method,
            scores: vec![f64::NAN; file.final_ranking.len()],
            order: file.final_ranking,
        })
    } else {
        let file: RankingFile = serde_json::from_value(value).map_err(json_err)?;
        Ok(file.ranking())
    }
}

#[derive(Serialize)]
struct SweepSummary {
    setting: Setting,
    classifier: ClassifierKind,
    selected: f64,
    ca: f64,
    baseline_ca: f64,
    rho: f64,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let tensor = load_dataset(&args.input, &args.manifest)?;
    let ranking = read_ranking(&args.ranking)?;
    let mut params = ClassifierParams::default();
    args.classifier_flags.apply(&mut params);
    let spec = params.spec(args.classifier);
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    if !(args.split > 0.0 && args.split < 1.0) {
        return Err(Error::Config(format!("--split must lie in (0, 1), got {}", args.split)));
    }
    let options = ExperimentOptions {
        split_fraction: args.split,
        seed: args.seed,
        sweep_row_cap: args.sweep_row_cap.filter(|&c| c > 0),
        horizontal_ranking: HorizontalRanking::Shared,
    };
    let name = Manifest::read(&args.manifest)?.name;
    let precision: Precision = args.precision.into();
    let report = match args.setting {
        Setting::Vertical => {
            let (train, test) = split(&form_vertical(&tensor)?, options.split_fraction, options.seed)?;
            let prepared = VerticalPrepared { train, test, ranking };
            let report = evaluate_vertical(&prepared, &name, &spec, &options)?;
            write_curve(&args.out, &report.curve, precision)?;
            report
        }
        Setting::Horizontal => {
            let report = sweep_horizontal(&tensor, &ranking, &name, &spec, &options)?;
            write_trial_curves(&args.out, &report, precision)?;
            report
        }
    };
    let summary = SweepSummary {
        setting: report.setting,
        classifier: report.classifier,
        selected: report.selected,
        ca: report.ca,
        baseline_ca: report.baseline_ca,
        rho: report.rho,
    };
    println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(())
}
